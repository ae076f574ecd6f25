#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fclass/dataset.hpp"
#include "fclass/grid.hpp"

namespace fclass {

/// B-spline basis evaluated on a grid. Row j of B holds psi_j at the grid
/// points; columns sum to one (partition of unity).
struct BasisSystem {
    int J = 0;
    int order = 4;
    std::vector<double> knots;
    Eigen::MatrixXd B;  // J x m
    TimeGrid grid = TimeGrid::standard();
};

/// Clamped B-spline basis on [0,1]: order-fold boundary knots and J - order
/// uniform interior knots, evaluated by the Cox-de Boor recursion.
BasisSystem make_bspline_basis(int J, const TimeGrid& grid, int order = 4);

/// Composite Simpson estimate of the integral of f over [0,1].
double simpson_integrate(std::span<const double> values, const TimeGrid& grid);

/// Simpson quadrature weights for the grid (so that sum_i w_i f(t_i)
/// approximates the integral).
Eigen::VectorXd simpson_weights(const TimeGrid& grid);

/// The n x J matrix of curve-basis inner products Z_ij = int psi_j X_i.
struct DesignMatrix {
    Eigen::MatrixXd Z;
    int J = 0;
};

DesignMatrix design_matrix(const LabeledFunctionalDataset& dataset, const BasisSystem& basis);

/// Evaluate one curve's basis inner products (a row of the design matrix).
Eigen::VectorXd design_row(std::span<const double> values, const BasisSystem& basis);

}  // namespace fclass
