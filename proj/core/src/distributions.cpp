#include "fclass/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace fclass {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;

/// Cholesky that names the first failing leading minor on error.
Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& A, const char* what) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    // Locate the smallest non-positive-definite leading minor for the message.
    for (int k = 1; k <= A.rows(); ++k) {
        Eigen::LLT<Eigen::MatrixXd> sub(A.topLeftCorner(k, k));
        if (sub.info() != Eigen::Success) {
            throw std::runtime_error(std::string(what) + ": matrix not positive definite (leading minor of order " +
                                     std::to_string(k) + " is not positive)");
        }
    }
    throw std::runtime_error(std::string(what) + ": Cholesky factorization failed");
}

double log_multivariate_gamma(double a, int p) {
    double s = 0.25 * p * (p - 1) * std::log(M_PI);
    for (int j = 1; j <= p; ++j) s += std::lgamma(a + 0.5 * (1 - j));
    return s;
}

/// Robert's one-sided translated-exponential rejection sampler for the
/// standard normal restricted to (lo, hi) with lo >= 0 well into the tail.
double truncnorm_tail_std(double lo, double hi, RngStream& rng) {
    const double lambda = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
    for (int it = 0; it < 100000; ++it) {
        const double x = lo - std::log(rng.uniform()) / lambda;
        if (x > hi) continue;
        const double d = x - lambda;
        if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
    }
    throw std::runtime_error("sample_truncnorm: tail rejection failed to accept (interval [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "])");
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_cdf_upper(double z) { return 0.5 * std::erfc(z / kSqrt2); }

double normal_logpdf(double x, double mean, double sd) {
    const double u = (x - mean) / sd;
    return -0.5 * u * u - std::log(sd) - 0.5 * kLog2Pi;
}

// Wichura (1988), algorithm AS 241, PPND16.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::invalid_argument("normal_quantile: p must lie in [0,1]");
    }
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) *
                       r +
                   1.3731693765509461125e+4) *
                      r +
                  1.9715909503065514427e+3) *
                     r +
                 1.3314166789178437745e+2) *
                    r +
                3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) *
                       r +
                   5.3941960214247511077e+3) *
                      r +
                  6.8718700749205790830e+2) *
                     r +
                 4.2313330701600911252e+1) *
                    r +
                1.0);
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                   1.27045825245236838258e+0) *
                      r +
                  3.64784832476320460504e+0) *
                     r +
                 5.76949722146069140550e+0) *
                    r +
                4.63033784615654529590e+0) *
                   r +
               1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                   1.48103976427480074590e-1) *
                      r +
                  6.89767334985100004550e-1) *
                     r +
                 1.67638483018380384940e+0) *
                    r +
                2.05319162663775882187e+0) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                   2.65321895265761230930e-2) *
                      r +
                  2.96560571828504891230e-1) *
                     r +
                 1.78482653991729133580e+0) *
                    r +
                5.46378491116411436990e+0) *
                   r +
               6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                   7.86869131145613259100e-4) *
                      r +
                  1.48753612908506148525e-2) *
                     r +
                 1.36929880922735805310e-1) *
                    r +
                5.99832206555887937690e-1) *
                   r +
               1.0);
    }
    return (q < 0.0) ? -val : val;
}

double sample_truncnorm(double mu, double var, double a, double b, RngStream& rng) {
    if (!(var > 0.0)) throw std::invalid_argument("sample_truncnorm: variance must be positive");
    if (!(a < b)) throw std::invalid_argument("sample_truncnorm: need a < b");
    const double sd = std::sqrt(var);
    const double lo = (a - mu) / sd;
    const double hi = (b - mu) / sd;

    constexpr double kTail = 5.0;
    double z;
    if (lo >= kTail) {
        z = truncnorm_tail_std(lo, hi, rng);
    } else if (hi <= -kTail) {
        z = -truncnorm_tail_std(-hi, -lo, rng);
    } else if (lo >= 0.0) {
        // Work in the upper tail so the CDF values keep relative precision.
        const double qa = normal_cdf_upper(lo);
        const double qb = normal_cdf_upper(hi);
        const double u = qb + (qa - qb) * rng.uniform();
        z = -normal_quantile(u);
    } else if (hi <= 0.0) {
        const double pa = normal_cdf(lo);
        const double pb = normal_cdf(hi);
        const double u = pa + (pb - pa) * rng.uniform();
        z = normal_quantile(u);
    } else {
        const double pa = normal_cdf(lo);
        const double pb = normal_cdf(hi);
        const double u = pa + (pb - pa) * rng.uniform();
        z = normal_quantile(u);
    }
    if (z < lo) z = lo;
    if (z > hi) z = hi;
    return mu + sd * z;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng) {
    if (cov.rows() != mean.size()) throw std::invalid_argument("sample_mvn: dimension mismatch");
    const Eigen::MatrixXd L = cholesky_or_throw(cov, "sample_mvn");
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + L * z;
}

Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& M, const Eigen::MatrixXd& U,
                                     const Eigen::MatrixXd& V, RngStream& rng) {
    if (U.rows() != M.rows() || V.rows() != M.cols()) {
        throw std::invalid_argument("sample_matrix_normal: dimension mismatch");
    }
    const Eigen::MatrixXd Lu = cholesky_or_throw(U, "sample_matrix_normal (row covariance)");
    const Eigen::MatrixXd Lv = cholesky_or_throw(V, "sample_matrix_normal (column covariance)");
    Eigen::MatrixXd Z(M.rows(), M.cols());
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j) Z(i, j) = rng.normal();
    return M + Lu * Z * Lv.transpose();
}

Eigen::MatrixXd sample_inverse_wishart(double nu, const Eigen::MatrixXd& scale, RngStream& rng) {
    const int p = static_cast<int>(scale.rows());
    if (!(nu > p - 1)) {
        throw std::invalid_argument("sample_inverse_wishart: need nu > dim - 1 (nu = " + std::to_string(nu) +
                                    ", dim = " + std::to_string(p) + ")");
    }
    // Bartlett draw of W ~ Wishart_nu(scale^{-1}); the result is W^{-1}.
    const Eigen::MatrixXd Ls = cholesky_or_throw(scale, "sample_inverse_wishart");
    Eigen::MatrixXd Lpsi = Ls.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(p, p));
    // scale^{-1} = Lpsi^T Lpsi; we need a lower Cholesky factor of scale^{-1}.
    Eigen::MatrixXd psi_inv = Lpsi.transpose() * Lpsi;
    const Eigen::MatrixXd L = cholesky_or_throw(psi_inv, "sample_inverse_wishart (inverse scale)");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        A(i, i) = std::sqrt(rng.chi_squared(nu - i));
        for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
    }
    const Eigen::MatrixXd LA = L * A;
    const Eigen::MatrixXd W = LA * LA.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(W);
    Eigen::MatrixXd X = llt.solve(Eigen::MatrixXd::Identity(p, p));
    return 0.5 * (X + X.transpose());
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    if (x.size() != mean.size() || cov.rows() != x.size()) {
        throw std::invalid_argument("mvn_logpdf: dimension mismatch");
    }
    const Eigen::MatrixXd L = cholesky_or_throw(cov, "mvn_logpdf");
    const Eigen::VectorXd u = L.triangularView<Eigen::Lower>().solve(x - mean);
    const double logdet = 2.0 * L.diagonal().array().log().sum();
    return -0.5 * (x.size() * kLog2Pi + logdet + u.squaredNorm());
}

double matnorm_logpdf(const Eigen::MatrixXd& X, const Eigen::MatrixXd& M, const Eigen::MatrixXd& U,
                      const Eigen::MatrixXd& V) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (M.rows() != n || M.cols() != p || U.rows() != n || V.rows() != p) {
        throw std::invalid_argument("matnorm_logpdf: dimension mismatch");
    }
    const Eigen::MatrixXd Lu = cholesky_or_throw(U, "matnorm_logpdf (row covariance)");
    const Eigen::MatrixXd Lv = cholesky_or_throw(V, "matnorm_logpdf (column covariance)");
    // tr(V^{-1} (X-M)^T U^{-1} (X-M)) = || Lu^{-1} (X-M) Lv^{-T} ||_F^2
    Eigen::MatrixXd A = Lu.triangularView<Eigen::Lower>().solve(X - M);
    Eigen::MatrixXd B = Lv.triangularView<Eigen::Lower>().solve(A.transpose());
    const double quad = B.squaredNorm();
    const double logdet_u = 2.0 * Lu.diagonal().array().log().sum();
    const double logdet_v = 2.0 * Lv.diagonal().array().log().sum();
    return -0.5 * (n * p * kLog2Pi + p * logdet_u + n * logdet_v + quad);
}

double iw_logpdf(const Eigen::MatrixXd& S, double nu, const Eigen::MatrixXd& scale) {
    const int p = static_cast<int>(S.rows());
    if (scale.rows() != p) throw std::invalid_argument("iw_logpdf: dimension mismatch");
    if (!(nu > p - 1)) throw std::invalid_argument("iw_logpdf: need nu > dim - 1");
    const Eigen::MatrixXd Lpsi = cholesky_or_throw(scale, "iw_logpdf (scale)");
    const Eigen::MatrixXd Ls = cholesky_or_throw(S, "iw_logpdf (argument)");
    const double logdet_psi = 2.0 * Lpsi.diagonal().array().log().sum();
    const double logdet_s = 2.0 * Ls.diagonal().array().log().sum();
    // tr(scale S^{-1}) = || Ls^{-1} Lpsi ||_F^2
    const Eigen::MatrixXd A = Ls.triangularView<Eigen::Lower>().solve(Lpsi);
    const double tr = A.squaredNorm();
    return 0.5 * nu * logdet_psi - 0.5 * nu * p * std::log(2.0) - log_multivariate_gamma(0.5 * nu, p) -
           0.5 * (nu + p + 1) * logdet_s - 0.5 * tr;
}

double GaussLaguerreRule::integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (int q = 0; q < order; ++q) s += weights[q] * f(nodes[q]);
    return s;
}

GaussLaguerreRule gauss_laguerre_rule(int order, double alpha) {
    if (order < 1) throw std::invalid_argument("gauss_laguerre_rule: order must be >= 1");
    if (!(alpha > -1.0)) throw std::invalid_argument("gauss_laguerre_rule: alpha must exceed -1");
    // Golub-Welsch on the Jacobi matrix of the generalized Laguerre recurrence.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 0; k < order; ++k) {
        J(k, k) = 2.0 * k + alpha + 1.0;
        if (k > 0) {
            const double off = std::sqrt(k * (k + alpha));
            J(k, k - 1) = off;
            J(k - 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw std::runtime_error("gauss_laguerre_rule: eigensolver failed");
    GaussLaguerreRule rule;
    rule.order = order;
    rule.alpha = alpha;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(order);
    for (int q = 0; q < order; ++q) {
        const double v0 = es.eigenvectors()(0, q);
        rule.weights[q] = v0 * v0;  // normalized: total mass Gamma(alpha+1) divides out
    }
    return rule;
}

GpSampler::GpSampler(const MeanFn& mean, const KernelFn& kernel, const TimeGrid& grid, double jitter_rel) {
    const Eigen::Index m = static_cast<Eigen::Index>(grid.size());
    mean_.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) mean_[i] = mean(grid[i]);
    Eigen::MatrixXd K(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = kernel(grid[i], grid[j]);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    const double max_diag = K.diagonal().maxCoeff();
    if (max_diag == 0.0) {
        // Degenerate (zero) kernel: draws equal the mean exactly.
        chol_ = Eigen::MatrixXd::Zero(m, m);
        return;
    }
    double jitter = jitter_rel * max_diag;
    const double jitter_cap = 1e-4 * max_diag;
    for (;;) {
        Eigen::LLT<Eigen::MatrixXd> llt(K + jitter * Eigen::MatrixXd::Identity(m, m));
        if (llt.info() == Eigen::Success) {
            chol_ = llt.matrixL();
            jitter_ = jitter;
            return;
        }
        jitter *= 10.0;
        if (jitter > jitter_cap) {
            throw std::runtime_error("GpSampler: kernel matrix not factorizable (final jitter " +
                                     std::to_string(jitter / 10.0) + ")");
        }
    }
}

std::vector<double> GpSampler::draw(RngStream& rng) const {
    const Eigen::Index m = mean_.size();
    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) z[i] = rng.normal();
    Eigen::VectorXd x = mean_ + chol_ * z;
    return std::vector<double>(x.data(), x.data() + m);
}

std::vector<double> sample_gp(const MeanFn& mean, const KernelFn& kernel, const TimeGrid& grid,
                              RngStream& rng, double jitter_rel) {
    return GpSampler(mean, kernel, grid, jitter_rel).draw(rng);
}

}  // namespace fclass
