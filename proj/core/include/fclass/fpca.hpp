#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fclass/dataset.hpp"
#include "fclass/grid.hpp"

namespace fclass {

/// Functional principal components: mean curve plus m component curves,
/// orthonormal under Simpson quadrature, with nonincreasing eigenvalues.
struct FpcaModel {
    Eigen::VectorXd mean;        // grid length
    Eigen::MatrixXd components;  // grid length x m
    Eigen::VectorXd eigenvalues; // m, nonincreasing
    TimeGrid grid = TimeGrid::standard();

    int num_components() const { return static_cast<int>(eigenvalues.size()); }
};

struct FpcaOptions {
    int num_components = 0;          // 0: choose by variance threshold
    double variance_threshold = 0.95;
};

/// Eigen-decomposition of the quadrature-weighted empirical covariance of
/// the centered curves (divisor n).
FpcaModel fit_fpca(const std::vector<std::vector<double>>& curves, const TimeGrid& grid,
                   const FpcaOptions& options = {});

FpcaModel fit_fpca(const LabeledFunctionalDataset& dataset, const FpcaOptions& options = {});

/// Scores f_j = Simpson inner product of (curve - mean) with component j.
Eigen::VectorXd project_scores(std::span<const double> curve, const FpcaModel& model);

}  // namespace fclass
