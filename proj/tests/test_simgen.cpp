#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fclass/basis.hpp"
#include "fclass/distributions.hpp"
#include "fclass/grid.hpp"
#include "fclass/ordered_probit.hpp"
#include "fclass/rng.hpp"
#include "fclass/simulate.hpp"

using namespace fclass;
using namespace fclass::simgen;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("simgen") {

TEST_CASE("generators are deterministic and balanced") {
    for (Kind kind : {Kind::omp, Kind::ump, Kind::mlo, Kind::lda, Kind::qda}) {
        GeneratorSpec spec;
        spec.kind = kind;
        spec.n_per_class = 12;
        spec.seed = 5;
        const auto a = generate(spec);
        const auto b = generate(spec);
        REQUIRE(a.size() == 36);
        CHECK(a.num_classes() == 3);
        for (auto c : a.class_counts()) CHECK(c == 12);
        REQUIRE(b.size() == a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.label(i) == b.label(i));
            CHECK(a[i].values == b[i].values);
        }
    }
}

TEST_CASE("omp label frequencies match the category-probability oracle") {
    // label the raw process in test code and compare frequencies against the
    // mean of oprobit::category_prob over the same curves
    const TimeGrid grid = TimeGrid::standard();
    const auto beta = default_omp_beta(grid);
    const Eigen::VectorXd w = simpson_weights(grid);
    GpSampler gp([](double t) { return std::sin(t); },
                 [](double s, double t) { return 100.0 * std::exp(-100.0 * (s - t) * (s - t)); }, grid);
    oprobit::OrderedCutpoints cp;
    cp.gamma.resize(2);
    cp.gamma << 0.0, 8.0;

    RngStream rng(17, 0);
    const int N = 20000;
    Eigen::Vector3d freq = Eigen::Vector3d::Zero();
    Eigen::Vector3d expected = Eigen::Vector3d::Zero();
    for (int i = 0; i < N; ++i) {
        const auto x = gp.draw(rng);
        double v = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) v += w[static_cast<Eigen::Index>(j)] * beta[j] * x[j];
        expected += oprobit::category_prob(v, cp);
        const double latent = v + rng.normal();
        int y = 0;
        while (y + 1 < 3 && latent > cp.gamma[y]) ++y;
        freq[y] += 1.0;
    }
    freq /= N;
    expected /= N;
    for (int k = 0; k < 3; ++k) CHECK(std::abs(freq[k] - expected[k]) < 0.01);
    // all classes viable for rejection balancing
    CHECK(expected.minCoeff() > 0.03);
}

TEST_CASE("omp starvation guard") {
    // beta = 0 makes class 3 probability ~6e-16: starvation error expected
    const TimeGrid grid = TimeGrid::standard();
    const Curve beta(grid.size(), 0.0);
    RngStream rng(19, 0);
    CHECK_THROWS_WITH_AS(generate_omp(9, beta, {-kInf, 0.0, 8.0, kInf}, grid, rng),
                         doctest::Contains("starvation"), std::runtime_error);
}

TEST_CASE("omp rejects invalid cutpoints") {
    const TimeGrid grid = TimeGrid::standard();
    const auto beta = default_omp_beta(grid);
    RngStream rng(23, 0);
    CHECK_THROWS(generate_omp(9, beta, {0.0, 8.0}, grid, rng));          // no infinities
    CHECK_THROWS(generate_omp(9, beta, {-kInf, 8.0, 0.0, kInf}, grid, rng));  // not increasing
}

TEST_CASE("ump equal curves give uniform labels") {
    const TimeGrid grid = TimeGrid::standard();
    const auto beta = default_omp_beta(grid);
    std::vector<Curve> betas = {beta, beta, beta};
    RngStream rng(29, 0);
    // with identical utilities the argmax is a symmetric coin: balanced
    // rejection fills quickly and label frequencies are uniform by symmetry
    const auto ds = generate_ump(30, betas, grid, rng);
    for (auto c : ds.class_counts()) CHECK(c == 10);
}

TEST_CASE("mlo tie-break at zero curves") {
    const TimeGrid grid = TimeGrid::standard();
    std::vector<Curve> betas = {Curve(grid.size(), 0.0), Curve(grid.size(), 0.0)};
    RngStream rng(31, 0);
    // all logits tie at 0 -> every draw labels class 1; classes 2,3 starve
    CHECK_THROWS_WITH_AS(generate_mlo(9, betas, grid, rng), doctest::Contains("starvation"),
                         std::runtime_error);
}

TEST_CASE("lda/qda class moments match the stated processes") {
    const TimeGrid grid = TimeGrid::regular(21);  // coarser grid keeps the moment check cheap
    RngStream rng(37, 0);
    const int n = 10000;
    const auto ds = generate_lda(n, grid, rng);
    REQUIRE(ds.size() == static_cast<std::size_t>(3 * n));

    std::vector<Eigen::VectorXd> means(3, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())));
    std::vector<int> counts(3, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& s = ds[i];
        means[static_cast<std::size_t>(*s.label)] +=
            Eigen::Map<const Eigen::VectorXd>(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
        ++counts[static_cast<std::size_t>(*s.label)];
    }
    auto mean_fn = [](int k, double t) {
        if (k == 0) return std::sin(t) + 2.0 * std::cos(t);
        if (k == 1) return std::sin(t);
        return std::sin(t) - 3.0 * std::cos(t);
    };
    for (int k = 0; k < 3; ++k) {
        means[static_cast<std::size_t>(k)] /= counts[static_cast<std::size_t>(k)];
        double sup = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            sup = std::max(sup, std::abs(means[static_cast<std::size_t>(k)][static_cast<Eigen::Index>(j)] -
                                         mean_fn(k, grid[j])));
        }
        CHECK(sup < 0.1);
    }

    // pooled covariance against the shared kernel (class 2 = sin t mean)
    const auto mg = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(mg, mg);
    int n2 = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (*ds[i].label != 1) continue;
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(ds[i].values.data(), mg) - means[1];
        cov += x * x.transpose();
        ++n2;
    }
    cov /= n2;
    Eigen::MatrixXd Kmat(mg, mg);
    for (Eigen::Index a = 0; a < mg; ++a)
        for (Eigen::Index b = 0; b < mg; ++b)
            Kmat(a, b) = std::exp(-30.0 * (grid[static_cast<std::size_t>(a)] - grid[static_cast<std::size_t>(b)]) *
                                  (grid[static_cast<std::size_t>(a)] - grid[static_cast<std::size_t>(b)]));
    CHECK((cov - Kmat).norm() / Kmat.norm() < 0.05);

    // qda: per-class kernels differ; spot check the exponential kernel class
    RngStream rng2(41, 0);
    const auto qds = generate_qda(4000, grid, rng2);
    Eigen::MatrixXd cov3 = Eigen::MatrixXd::Zero(mg, mg);
    Eigen::VectorXd mean3 = Eigen::VectorXd::Zero(mg);
    int n3 = 0;
    for (std::size_t i = 0; i < qds.size(); ++i) {
        if (*qds[i].label != 2) continue;
        mean3 += Eigen::Map<const Eigen::VectorXd>(qds[i].values.data(), mg);
        ++n3;
    }
    mean3 /= n3;
    for (std::size_t i = 0; i < qds.size(); ++i) {
        if (*qds[i].label != 2) continue;
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(qds[i].values.data(), mg) - mean3;
        cov3 += x * x.transpose();
    }
    cov3 /= n3;
    Eigen::MatrixXd K3(mg, mg);
    for (Eigen::Index a = 0; a < mg; ++a)
        for (Eigen::Index b = 0; b < mg; ++b)
            K3(a, b) = std::exp(-std::abs(grid[static_cast<std::size_t>(a)] - grid[static_cast<std::size_t>(b)]));
    CHECK((cov3 - K3).norm() / K3.norm() < 0.08);
}

TEST_CASE("generated datasets pass validation and spec parsing works") {
    CHECK(kind_from_string("omp") == Kind::omp);
    CHECK(kind_from_string("qda") == Kind::qda);
    CHECK_THROWS(kind_from_string("nope"));
    CHECK(to_string(Kind::mlo) == "mlo");
}

}  // TEST_SUITE
