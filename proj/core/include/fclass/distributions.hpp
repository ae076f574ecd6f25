#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fclass/grid.hpp"
#include "fclass/rng.hpp"

namespace fclass {

// ---------------------------------------------------------------------------
// Scalar normal kernels

/// Standard normal CDF, |abs error| < 1e-14 over the double range.
double normal_cdf(double z);

/// Upper tail P(Z > z), full relative precision in the far right tail.
double normal_cdf_upper(double z);

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

double normal_logpdf(double x, double mean, double sd);

// ---------------------------------------------------------------------------
// Truncated normal

/// Exact draw from N(mu, var) restricted to (a, b). Pass +-infinity for
/// one-sided intervals. Stable for truncation regions far into the tails
/// (inverse CDF centrally, exponential rejection beyond 5 sigma).
double sample_truncnorm(double mu, double var, double a, double b, RngStream& rng);

// ---------------------------------------------------------------------------
// Multivariate normal / matrix normal / inverse Wishart

/// Draw from N(mean, cov) via Cholesky. Throws on a non-SPD matrix, naming
/// the first failing leading minor.
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng);

/// Draw a p x q matrix with mean M, row covariance U, column covariance V
/// (vectorized covariance V (x) U).
Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& M, const Eigen::MatrixXd& U,
                                     const Eigen::MatrixXd& V, RngStream& rng);

/// Inverse-Wishart draw with E[X] = scale / (nu - dim - 1) for nu > dim + 1.
Eigen::MatrixXd sample_inverse_wishart(double nu, const Eigen::MatrixXd& scale, RngStream& rng);

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Matrix normal log density for an n x p matrix X with row covariance U
/// (n x n) and column covariance V (p x p).
double matnorm_logpdf(const Eigen::MatrixXd& X, const Eigen::MatrixXd& M, const Eigen::MatrixXd& U,
                      const Eigen::MatrixXd& V);

/// Inverse-Wishart log density at S, parameterized so that the mean is
/// scale / (nu - dim - 1).
double iw_logpdf(const Eigen::MatrixXd& S, double nu, const Eigen::MatrixXd& scale);

// ---------------------------------------------------------------------------
// Gauss-Laguerre quadrature

/// Nodes and weights for integrating f against x^alpha e^{-x} on (0, inf).
/// Weights are normalized by Gamma(alpha + 1) so they always sum to one;
/// for alpha = 0 this is the plain rule with sum(w) = Gamma(1) = 1.
struct GaussLaguerreRule {
    int order = 0;
    double alpha = 0.0;
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    /// Integral of f against the normalized weight x^alpha e^{-x} / Gamma(alpha+1).
    double integrate(const std::function<double(double)>& f) const;
};

GaussLaguerreRule gauss_laguerre_rule(int order, double alpha = 0.0);

// ---------------------------------------------------------------------------
// Gaussian process simulation

using KernelFn = std::function<double(double, double)>;
using MeanFn = std::function<double(double)>;

/// One curve draw from the grid-discretized GP. Jitter starts at
/// `jitter_rel` times the max kernel diagonal and escalates x10 up to 1e-4
/// of the diagonal before failing.
std::vector<double> sample_gp(const MeanFn& mean, const KernelFn& kernel, const TimeGrid& grid,
                              RngStream& rng, double jitter_rel = 1e-10);

/// Reusable factor for drawing many curves from one GP.
class GpSampler {
public:
    GpSampler(const MeanFn& mean, const KernelFn& kernel, const TimeGrid& grid, double jitter_rel = 1e-10);

    std::vector<double> draw(RngStream& rng) const;
    const Eigen::MatrixXd& cholesky_factor() const { return chol_; }
    double applied_jitter() const { return jitter_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd chol_;
    double jitter_ = 0.0;
};

}  // namespace fclass
