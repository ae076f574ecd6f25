#include <doctest.h>

#include <cmath>

#include "fclass/basis.hpp"
#include "fclass/dataset.hpp"
#include "fclass/grid.hpp"
#include "fclass/rng.hpp"

#include "oracles.hpp"

using namespace fclass;

namespace {

LabeledFunctionalDataset curves_dataset(const std::vector<std::vector<double>>& curves, const TimeGrid& grid) {
    std::vector<FunctionalSample> samples;
    for (const auto& c : curves) {
        FunctionalSample s;
        s.values = c;
        s.label = 0;
        samples.push_back(std::move(s));
    }
    return LabeledFunctionalDataset(grid, std::move(samples), 1);
}

}  // namespace

TEST_SUITE("basis") {

TEST_CASE("J=4 order 4 is the cubic Bernstein basis") {
    const TimeGrid grid = TimeGrid::standard();
    const auto basis = make_bspline_basis(4, grid, 4);
    // boundary-knot identity at t=0
    CHECK(basis.B(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(basis.B(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(basis.B(2, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(basis.B(3, 0) == doctest::Approx(0.0).epsilon(1e-14));
    // Bernstein polynomials at t=0.37
    const double t = 0.37;
    const std::size_t g = 37;
    REQUIRE(grid[g] == doctest::Approx(t).epsilon(1e-12));
    auto bern = [&](int k) {
        const double binom[] = {1, 3, 3, 1};
        return binom[k] * std::pow(t, k) * std::pow(1 - t, 3 - k);
    };
    for (int k = 0; k < 4; ++k) {
        CHECK(basis.B(k, static_cast<Eigen::Index>(g)) == doctest::Approx(bern(k)).epsilon(1e-12));
    }
}

TEST_CASE("partition of unity and range") {
    const TimeGrid grid = TimeGrid::standard();
    for (int J : {4, 5, 6, 9, 15}) {
        for (int order : {2, 3, 4}) {
            if (J < order) continue;
            const auto basis = make_bspline_basis(J, grid, order);
            for (Eigen::Index g = 0; g < basis.B.cols(); ++g) {
                CHECK(basis.B.col(g).sum() == doctest::Approx(1.0).epsilon(1e-10));
                CHECK(basis.B.col(g).minCoeff() >= 0.0);
                CHECK(basis.B.col(g).maxCoeff() <= 1.0 + 1e-12);
            }
        }
    }
    CHECK_THROWS(make_bspline_basis(3, grid, 4));  // J < order
}

TEST_CASE("matches the recursive Cox-de Boor oracle") {
    const TimeGrid grid = TimeGrid::standard();
    const auto basis = make_bspline_basis(6, grid, 4);
    for (double t : {0.0, 0.17, 0.5, 0.83, 1.0}) {
        const auto g = static_cast<Eigen::Index>(std::llround(t * 100));
        for (int j = 0; j < 6; ++j) {
            const double expected = oracles::coxdeboor_recursive(basis.knots, j, 4, t);
            CHECK(basis.B(j, g) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("simpson exact on polynomials through cubics") {
    const TimeGrid grid = TimeGrid::standard();
    std::vector<double> vals(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = 1.0;
    CHECK(simpson_integrate(vals, grid) == doctest::Approx(1.0).epsilon(1e-15));

    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = grid[i] * grid[i];
    CHECK(simpson_integrate(vals, grid) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = grid[i] * grid[i] * grid[i];
    CHECK(simpson_integrate(vals, grid) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("simpson matches the fine-grid oracle on a wiggly function") {
    const TimeGrid grid = TimeGrid::standard();
    auto f = [](double t) { return std::sin(2.0 * M_PI * t) * std::exp(t); };
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = f(grid[i]);
    const double oracle = oracles::trapezoid_fine(f);
    CHECK(simpson_integrate(vals, grid) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("simpson rejects even-length input") {
    const TimeGrid grid = TimeGrid::standard();
    std::vector<double> vals(100, 1.0);
    CHECK_THROWS(simpson_integrate(vals, grid));
}

TEST_CASE("design matrix row sums and zero curves") {
    const TimeGrid grid = TimeGrid::standard();
    const auto basis = make_bspline_basis(7, grid, 4);
    std::vector<std::vector<double>> curves = {
        std::vector<double>(grid.size(), 1.0),
        std::vector<double>(grid.size(), 0.0),
    };
    const auto ds = curves_dataset(curves, grid);
    const auto dm = design_matrix(ds, basis);
    CHECK(dm.Z.row(0).sum() == doctest::Approx(1.0).epsilon(1e-10));  // partition of unity integrates to 1
    CHECK(dm.Z.row(1).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("design matrix matches the fine-grid oracle on a random curve") {
    const TimeGrid grid = TimeGrid::standard();
    const auto basis = make_bspline_basis(6, grid, 4);
    RngStream rng(3, 0);
    // smooth random curve: random cubic polynomial plus a sine
    const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
    auto curve_fn = [&](double t) { return a + b * t + c * t * t + d * std::sin(3.0 * t); };
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = curve_fn(grid[i]);
    const auto ds = curves_dataset({vals}, grid);
    const auto dm = design_matrix(ds, basis);
    for (int j = 0; j < 6; ++j) {
        auto integrand = [&](double t) { return oracles::coxdeboor_recursive(basis.knots, j, 4, t) * curve_fn(t); };
        const double oracle = oracles::trapezoid_fine(integrand);
        CHECK(dm.Z(0, j) == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("design matrix is linear in the curves") {
    const TimeGrid grid = TimeGrid::standard();
    const auto basis = make_bspline_basis(8, grid, 4);
    RngStream rng(5, 0);
    std::vector<double> x(grid.size());
    std::vector<double> y(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
    }
    const double a = 1.7;
    const double b = -0.6;
    std::vector<double> combo(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) combo[i] = a * x[i] + b * y[i];
    const auto zx = design_row(x, basis);
    const auto zy = design_row(y, basis);
    const auto zc = design_row(combo, basis);
    for (int j = 0; j < 8; ++j) {
        CHECK(zc[j] == doctest::Approx(a * zx[j] + b * zy[j]).epsilon(1e-10));
    }
}

TEST_CASE("basis reproduction through the Gram matrix") {
    // for beta = theta^T psi, the Simpson inner products with psi_j equal the
    // Gram-matrix product
    const TimeGrid grid = TimeGrid::standard();
    const auto basis = make_bspline_basis(6, grid, 4);
    RngStream rng(8, 0);
    Eigen::VectorXd theta(6);
    for (int j = 0; j < 6; ++j) theta[j] = rng.normal();
    std::vector<double> beta(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        beta[i] = (basis.B.col(static_cast<Eigen::Index>(i)).transpose() * theta).value();
    }
    const Eigen::VectorXd lhs = design_row(beta, basis);
    const Eigen::VectorXd w = simpson_weights(grid);
    const Eigen::MatrixXd gram = basis.B * w.asDiagonal() * basis.B.transpose();
    const Eigen::VectorXd rhs = gram * theta;
    for (int j = 0; j < 6; ++j) CHECK(lhs[j] == doctest::Approx(rhs[j]).epsilon(1e-8));
}

TEST_CASE("design matrix rejects a grid mismatch") {
    const auto basis = make_bspline_basis(5, TimeGrid::standard(), 4);
    const TimeGrid other = TimeGrid::regular(51);
    std::vector<std::vector<double>> curves = {std::vector<double>(other.size(), 1.0)};
    const auto ds = curves_dataset(curves, other);
    CHECK_THROWS(design_matrix(ds, basis));
}

}  // TEST_SUITE
