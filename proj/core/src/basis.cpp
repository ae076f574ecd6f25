#include "fclass/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fclass {

namespace {

/// Index of the knot span containing t: largest i with knots[i] <= t and
/// knots[i] < knots[i+1]. The final span is treated as closed at t = 1.
std::size_t find_span(const std::vector<double>& knots, int order, double t) {
    const std::size_t n_basis = knots.size() - static_cast<std::size_t>(order);
    const std::size_t lo = static_cast<std::size_t>(order) - 1;
    const std::size_t hi = n_basis;  // one past the last valid span start
    if (t >= knots[hi]) return hi - 1;
    auto it = std::upper_bound(knots.begin() + static_cast<std::ptrdiff_t>(lo),
                               knots.begin() + static_cast<std::ptrdiff_t>(hi), t);
    return static_cast<std::size_t>(it - knots.begin()) - 1;
}

}  // namespace

BasisSystem make_bspline_basis(int J, const TimeGrid& grid, int order) {
    if (order < 2) throw std::invalid_argument("make_bspline_basis: order must be >= 2");
    if (J < order) {
        throw std::invalid_argument("make_bspline_basis: J (" + std::to_string(J) + ") must be >= order (" +
                                    std::to_string(order) + ")");
    }
    BasisSystem basis;
    basis.J = J;
    basis.order = order;
    basis.grid = grid;

    // Clamped knot vector: order-fold 0, uniform interior, order-fold 1.
    const int n_interior = J - order;
    basis.knots.reserve(static_cast<std::size_t>(J + order));
    for (int i = 0; i < order; ++i) basis.knots.push_back(0.0);
    for (int i = 1; i <= n_interior; ++i) {
        basis.knots.push_back(static_cast<double>(i) / static_cast<double>(n_interior + 1));
    }
    for (int i = 0; i < order; ++i) basis.knots.push_back(1.0);

    const std::size_t m = grid.size();
    basis.B = Eigen::MatrixXd::Zero(J, static_cast<Eigen::Index>(m));

    // de Boor's algorithm: at each t only `order` basis functions are nonzero.
    std::vector<double> vals(static_cast<std::size_t>(order));
    std::vector<double> left(static_cast<std::size_t>(order));
    std::vector<double> right(static_cast<std::size_t>(order));
    for (std::size_t g = 0; g < m; ++g) {
        const double t = grid[g];
        const std::size_t span = find_span(basis.knots, order, t);
        vals[0] = 1.0;
        for (int j = 1; j < order; ++j) {
            left[static_cast<std::size_t>(j)] = t - basis.knots[span + 1 - static_cast<std::size_t>(j)];
            right[static_cast<std::size_t>(j)] = basis.knots[span + static_cast<std::size_t>(j)] - t;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
                const double temp = vals[static_cast<std::size_t>(r)] / denom;
                vals[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
                saved = left[static_cast<std::size_t>(j - r)] * temp;
            }
            vals[static_cast<std::size_t>(j)] = saved;
        }
        const std::size_t first = span - static_cast<std::size_t>(order) + 1;
        for (int j = 0; j < order; ++j) {
            basis.B(static_cast<Eigen::Index>(first) + j, static_cast<Eigen::Index>(g)) =
                vals[static_cast<std::size_t>(j)];
        }
    }
    return basis;
}

Eigen::VectorXd simpson_weights(const TimeGrid& grid) {
    const std::size_t m = grid.size();
    Eigen::VectorXd w(static_cast<Eigen::Index>(m));
    const double h = grid.step();
    w[0] = h / 3.0;
    w[static_cast<Eigen::Index>(m) - 1] = h / 3.0;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        w[static_cast<Eigen::Index>(i)] = (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
    }
    return w;
}

double simpson_integrate(std::span<const double> values, const TimeGrid& grid) {
    if (values.size() != grid.size()) {
        throw std::invalid_argument("simpson_integrate: values length " + std::to_string(values.size()) +
                                    " does not match grid length " + std::to_string(grid.size()));
    }
    if (values.size() % 2 == 0) {
        throw std::invalid_argument("simpson_integrate: even-length input");
    }
    const double h = grid.step();
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); i += 2) odd += values[i];
    for (std::size_t i = 2; i + 1 < values.size(); i += 2) even += values[i];
    return h / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

Eigen::VectorXd design_row(std::span<const double> values, const BasisSystem& basis) {
    if (values.size() != basis.grid.size()) {
        throw std::invalid_argument("design_row: curve length does not match basis grid");
    }
    const Eigen::Map<const Eigen::VectorXd> x(values.data(), static_cast<Eigen::Index>(values.size()));
    const Eigen::VectorXd w = simpson_weights(basis.grid);
    return basis.B * w.cwiseProduct(x);
}

DesignMatrix design_matrix(const LabeledFunctionalDataset& dataset, const BasisSystem& basis) {
    if (dataset.grid() != basis.grid) {
        throw std::invalid_argument("design_matrix: dataset grid does not match basis grid");
    }
    const auto n = static_cast<Eigen::Index>(dataset.size());
    DesignMatrix dm;
    dm.J = basis.J;
    dm.Z.resize(n, basis.J);
    const Eigen::VectorXd w = simpson_weights(basis.grid);
    const Eigen::MatrixXd Bw = basis.B * w.asDiagonal();  // J x m
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = dataset[static_cast<std::size_t>(i)].values;
        const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
        dm.Z.row(i) = (Bw * x).transpose();
    }
    return dm;
}

}  // namespace fclass
