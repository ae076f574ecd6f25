#include "fclass/fpca.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "fclass/basis.hpp"

namespace fclass {

FpcaModel fit_fpca(const std::vector<std::vector<double>>& curves, const TimeGrid& grid,
                   const FpcaOptions& options) {
    const auto n = static_cast<Eigen::Index>(curves.size());
    const auto m_grid = static_cast<Eigen::Index>(grid.size());
    if (n < 2) throw std::invalid_argument("fit_fpca: need at least two curves");
    Eigen::MatrixXd X(n, m_grid);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (curves[static_cast<std::size_t>(i)].size() != grid.size()) {
            throw std::invalid_argument("fit_fpca: curve " + std::to_string(i) + " does not match the grid");
        }
        X.row(i) = Eigen::Map<const Eigen::VectorXd>(curves[static_cast<std::size_t>(i)].data(), m_grid).transpose();
    }

    FpcaModel model;
    model.grid = grid;
    model.mean = X.colwise().mean().transpose();
    X.rowwise() -= model.mean.transpose();

    // Quadrature-weighted eigenproblem: with S = diag(simpson weights),
    // eigenvectors of S^{1/2} C S^{1/2} give components phi = S^{-1/2} v that
    // are orthonormal under the quadrature inner product.
    const Eigen::VectorXd w = simpson_weights(grid);
    const Eigen::VectorXd sqrt_w = w.array().sqrt();
    Eigen::MatrixXd C = (X.transpose() * X) / static_cast<double>(n);
    Eigen::MatrixXd Cw = sqrt_w.asDiagonal() * C * sqrt_w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Cw);
    if (es.info() != Eigen::Success) throw std::runtime_error("fit_fpca: eigensolver failed");

    // Eigen returns ascending order; keep the numerically nonzero ones, descending.
    const Eigen::VectorXd evals = es.eigenvalues();
    const double cutoff = std::max(evals.maxCoeff(), 0.0) * 1e-12;
    std::vector<int> keep;
    for (int i = static_cast<int>(evals.size()) - 1; i >= 0; --i) {
        if (evals[i] > cutoff) keep.push_back(i);
    }
    const int rank = static_cast<int>(keep.size());

    int m = options.num_components;
    if (m > 0) {
        if (m > rank) {
            throw std::invalid_argument("fit_fpca: requested " + std::to_string(m) +
                                        " components but only " + std::to_string(rank) +
                                        " are numerically nonzero");
        }
    } else {
        double total = 0.0;
        for (int idx : keep) total += evals[idx];
        double acc = 0.0;
        m = 0;
        for (int idx : keep) {
            acc += evals[idx];
            ++m;
            if (acc >= options.variance_threshold * total) break;
        }
    }

    model.eigenvalues.resize(m);
    model.components.resize(m_grid, m);
    for (int j = 0; j < m; ++j) {
        const int idx = keep[static_cast<std::size_t>(j)];
        model.eigenvalues[j] = evals[idx];
        Eigen::VectorXd phi = es.eigenvectors().col(idx).cwiseQuotient(sqrt_w);
        // Deterministic sign: largest-magnitude coordinate positive.
        Eigen::Index arg;
        phi.cwiseAbs().maxCoeff(&arg);
        if (phi[arg] < 0.0) phi = -phi;
        model.components.col(j) = phi;
    }
    return model;
}

FpcaModel fit_fpca(const LabeledFunctionalDataset& dataset, const FpcaOptions& options) {
    std::vector<std::vector<double>> curves;
    curves.reserve(dataset.size());
    for (const auto& s : dataset.samples()) curves.push_back(s.values);
    return fit_fpca(curves, dataset.grid(), options);
}

Eigen::VectorXd project_scores(std::span<const double> curve, const FpcaModel& model) {
    if (curve.size() != model.grid.size()) {
        throw std::invalid_argument("project_scores: curve length does not match the model grid");
    }
    const Eigen::Map<const Eigen::VectorXd> x(curve.data(), static_cast<Eigen::Index>(curve.size()));
    const Eigen::VectorXd w = simpson_weights(model.grid);
    const Eigen::VectorXd centered = (x - model.mean).cwiseProduct(w);
    return model.components.transpose() * centered;
}

}  // namespace fclass
