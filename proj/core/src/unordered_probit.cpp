#include "fclass/unordered_probit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace fclass::uprobit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbFloor = 1e-300;

double logsumexp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

struct ThetaSampler {
    Eigen::LLT<Eigen::MatrixXd> llt;  // of P = Z^T Z + V0^{-1}
    Eigen::MatrixXd prior_term;       // V0^{-1} U0
    Eigen::MatrixXd sigma_chol;       // lower factor of the column covariance
    int K;

    ThetaSampler(const Eigen::MatrixXd& Z, const UnorderedProbitPrior& prior, int K_) : K(K_) {
        const Eigen::MatrixXd P = Z.transpose() * Z + prior.V0_inv;
        llt.compute(P);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("uprobit::update_Theta: posterior precision not positive definite");
        }
        prior_term = prior.V0_inv * prior.U0;
        Eigen::LLT<Eigen::MatrixXd> sc(contrast_sigma(K));
        sigma_chol = sc.matrixL();
    }

    Eigen::MatrixXd posterior_mean(const Eigen::MatrixXd& ZtW) const { return llt.solve(prior_term + ZtW); }

    Eigen::MatrixXd draw(const Eigen::MatrixXd& ZtW, RngStream& rng) const {
        const Eigen::Index J = prior_term.rows();
        const Eigen::Index p = prior_term.cols();
        Eigen::MatrixXd N(J, p);
        for (Eigen::Index i = 0; i < J; ++i)
            for (Eigen::Index j = 0; j < p; ++j) N(i, j) = rng.normal();
        Eigen::MatrixXd L = llt.matrixL();
        // row factor: L^{-T} N has row covariance P^{-1}
        Eigen::MatrixXd X = L.transpose().triangularView<Eigen::Upper>().solve(N);
        return posterior_mean(ZtW) + X * sigma_chol.transpose();
    }

    /// log MN(Theta_star; U_n(ZtW), P^{-1}, Sigma)
    double log_ordinate(const Eigen::MatrixXd& Theta_star, const Eigen::MatrixXd& ZtW) const {
        const Eigen::Index J = Theta_star.rows();
        const Eigen::Index p = Theta_star.cols();
        const Eigen::MatrixXd D = Theta_star - posterior_mean(ZtW);
        Eigen::MatrixXd L = llt.matrixL();
        // tr(Sigma^{-1} D^T P D) = || L^T D Lsig^{-T} ||_F^2
        Eigen::MatrixXd A = L.transpose() * D;
        Eigen::MatrixXd B = sigma_chol.triangularView<Eigen::Lower>().solve(A.transpose());
        const double quad = B.squaredNorm();
        const double logdet_P = 2.0 * L.diagonal().array().log().sum();
        const double logdet_sigma = 2.0 * sigma_chol.diagonal().array().log().sum();
        return -0.5 * (J * p * std::log(2.0 * M_PI) - p * logdet_P + J * logdet_sigma + quad);
    }
};

}  // namespace

Eigen::MatrixXd contrast_sigma(int K) {
    if (K < 2) throw std::invalid_argument("contrast_sigma: need K >= 2");
    return Eigen::MatrixXd::Ones(K - 1, K - 1) + Eigen::MatrixXd::Identity(K - 1, K - 1);
}

UnorderedProbitPrior UnorderedProbitPrior::weakly_informative(int J, int K) {
    UnorderedProbitPrior p;
    p.U0 = Eigen::MatrixXd::Zero(J, K - 1);
    p.V0 = 100.0 * Eigen::MatrixXd::Identity(J, J);
    p.V0_inv = 0.01 * Eigen::MatrixXd::Identity(J, J);
    return p;
}

UnorderedProbitPrior UnorderedProbitPrior::diffuse(int J, int K) {
    UnorderedProbitPrior p = weakly_informative(J, K);
    p.V0_inv.setZero();
    return p;
}

Eigen::MatrixXd UnorderedProbitDraws::theta_mean() const {
    if (Theta.empty()) return {};
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Theta.front().rows(), Theta.front().cols());
    for (const auto& t : Theta) m += t;
    return m / static_cast<double>(Theta.size());
}

GaussLaguerreRule dunnett_rule(int order) { return gauss_laguerre_rule(order, -0.5); }

Eigen::VectorXd category_prob(const Eigen::VectorXd& eta, const GaussLaguerreRule& quad, double* defect) {
    const int K = static_cast<int>(eta.size()) + 1;
    Eigen::VectorXd p(K);
    // For category l the contrast means are z^T Theta^l: eta_k - eta_l for
    // k != l plus -eta_l; for category K they are eta itself.
    Eigen::VectorXd m(K - 1);
    for (int l = 0; l < K; ++l) {
        if (l == K - 1) {
            m = eta;
        } else {
            int idx = 0;
            for (int k = 0; k < K - 1; ++k) {
                if (k == l) continue;
                m[idx++] = eta[k] - eta[l];
            }
            m[idx] = -eta[l];
        }
        double acc = 0.0;
        for (int q = 0; q < quad.order; ++q) {
            const double s = std::sqrt(2.0 * quad.nodes[q]);
            double prod_neg = 1.0;
            double prod_pos = 1.0;
            for (int k = 0; k < K - 1; ++k) {
                prod_neg *= normal_cdf(-s - m[k]);
                prod_pos *= normal_cdf(s - m[k]);
            }
            acc += quad.weights[q] * (prod_neg + prod_pos);
        }
        p[l] = 0.5 * acc;
    }
    const double total = p.sum();
    if (defect != nullptr) *defect = std::abs(total - 1.0);
    if (total <= 0.0) {
        p.setConstant(1.0 / K);
        return p;
    }
    p /= total;
    for (int l = 0; l < K; ++l) p[l] = std::max(p[l], kProbFloor);
    return p;
}

double log_likelihood(const std::vector<int>& labels, const Eigen::MatrixXd& Eta,
                      const GaussLaguerreRule& quad) {
    double ll = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Eigen::VectorXd p = category_prob(Eta.row(static_cast<Eigen::Index>(i)).transpose(), quad);
        ll += std::log(p[labels[i]]);
    }
    return ll;
}

Eigen::MatrixXd update_Theta(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Z,
                             const UnorderedProbitPrior& prior, RngStream& rng) {
    const int K = static_cast<int>(W.cols()) + 1;
    ThetaSampler sampler(Z, prior, K);
    return sampler.draw(Z.transpose() * W, rng);
}

void update_W(Eigen::MatrixXd& W, const Eigen::MatrixXd& Theta, const std::vector<int>& labels,
              const Eigen::MatrixXd& Z, RngStream& rng) {
    const int K = static_cast<int>(W.cols()) + 1;
    const int p = K - 1;
    const Eigen::MatrixXd Mu = Z * Theta;  // n x (K-1)

    // Gaussian conditioning against the exchangeable Sigma: the regression
    // vector is 1/(K-1) on every other coordinate and the residual variance
    // is K/(K-1), for every site.
    const double reg = (p > 1) ? 1.0 / (p) : 0.0;  // Sigma_{l,-l} Sigma_{-l,-l}^{-1} = (1/(K-1)) 1^T
    const double tau2 = static_cast<double>(K) / (K - 1);

    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        for (int l = 0; l < p; ++l) {
            double cond = 0.0;
            double max_other = -kInf;
            for (int k = 0; k < p; ++k) {
                if (k == l) continue;
                cond += W(i, k) - Mu(i, k);
                max_other = std::max(max_other, W(i, k));
            }
            const double m_il = Mu(i, l) + reg * cond;
            double lo;
            double hi;
            if (y == l) {
                lo = std::max(max_other, 0.0);
                hi = kInf;
            } else if (y == K - 1) {
                lo = -kInf;
                hi = 0.0;
            } else {
                lo = -kInf;
                hi = max_other;
            }
            W(i, l) = sample_truncnorm(m_il, tau2, lo, hi, rng);
        }
    }
}

bool latent_consistent(const Eigen::MatrixXd& W, const std::vector<int>& labels) {
    const int K = static_cast<int>(W.cols()) + 1;
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y == K - 1) {
            for (int l = 0; l < K - 1; ++l) {
                if (!(W(i, l) < 0.0)) return false;
            }
        } else {
            double max_other = 0.0;
            for (int l = 0; l < K - 1; ++l) {
                if (l == y) continue;
                max_other = std::max(max_other, W(i, l));
            }
            if (!(W(i, y) > max_other)) return false;
        }
    }
    return true;
}

UnorderedProbitDraws run_mcmc(const std::vector<int>& labels, int K, const Eigen::MatrixXd& Z,
                              const UnorderedProbitPrior& prior, const McmcConfig& config) {
    if (K < 2) throw std::invalid_argument("uprobit::run_mcmc: need K >= 2");
    if (config.burn_in >= config.iterations) {
        throw std::invalid_argument("uprobit::run_mcmc: burn-in must be smaller than iteration count");
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (Z.rows() != n) throw std::invalid_argument("uprobit::run_mcmc: label/design size mismatch");
    const int G = config.iterations - config.burn_in;

    RngStream rng(config.seed, config.stream);
    ThetaSampler sampler(Z, prior, K);
    const GaussLaguerreRule quad = dunnett_rule(config.quadrature_order);

    UnorderedProbitDraws draws;
    draws.K = K;
    draws.Theta.reserve(G);
    draws.ZtW.reserve(G);

    // Label-consistent starting point for the latent utilities.
    Eigen::MatrixXd W(n, K - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        for (int l = 0; l < K - 1; ++l) W(i, l) = (y == l) ? 1.0 : -1.0;
    }
    Eigen::MatrixXd Theta = prior.U0;

    std::vector<double> ll_values;
    std::vector<int> ll_iters;
    for (int it = 0; it < config.iterations; ++it) {
        update_W(W, Theta, labels, Z, rng);
        const Eigen::MatrixXd ZtW = Z.transpose() * W;
        Theta = sampler.draw(ZtW, rng);
        if (!Theta.allFinite()) {
            throw std::runtime_error("uprobit::run_mcmc: divergent state at iteration " + std::to_string(it));
        }
        if (it >= config.burn_in) {
            draws.Theta.push_back(Theta);
            draws.ZtW.push_back(ZtW);
            const int g = it - config.burn_in;
            if (config.loglik_every > 0 && g % config.loglik_every == 0) {
                const double ll = log_likelihood(labels, Z * Theta, quad);
                if (!std::isfinite(ll)) {
                    throw std::runtime_error("uprobit::run_mcmc: divergent log-likelihood at iteration " +
                                             std::to_string(it));
                }
                ll_values.push_back(ll);
                ll_iters.push_back(it);
            }
        }
    }
    draws.final_W = W;
    draws.loglik = Eigen::Map<Eigen::VectorXd>(ll_values.data(), static_cast<Eigen::Index>(ll_values.size()));
    draws.loglik_iters = std::move(ll_iters);
    return draws;
}

ChibResult log_marginal_likelihood(const UnorderedProbitDraws& draws, const std::vector<int>& labels,
                                   const Eigen::MatrixXd& Z, const UnorderedProbitPrior& prior,
                                   const GaussLaguerreRule& quad) {
    if (draws.Theta.empty()) throw std::invalid_argument("uprobit::log_marginal_likelihood: empty draws");
    if (prior.V0_inv.isZero(0.0)) {
        throw std::invalid_argument("uprobit::log_marginal_likelihood: requires a proper prior on Theta");
    }
    const int K = draws.K;
    const auto G = static_cast<int>(draws.Theta.size());
    const Eigen::MatrixXd Theta_star = draws.theta_mean();

    ChibResult res;
    res.loglik_at_star = log_likelihood(labels, Z * Theta_star, quad);
    res.logprior_at_star = matnorm_logpdf(Theta_star, prior.U0, prior.V0, contrast_sigma(K));

    ThetaSampler sampler(Z, prior, K);
    Eigen::VectorXd terms(G);
    for (int g = 0; g < G; ++g) terms[g] = sampler.log_ordinate(Theta_star, draws.ZtW[static_cast<std::size_t>(g)]);
    res.log_posterior_ordinate = logsumexp(terms) - std::log(static_cast<double>(G));

    if (!std::isfinite(res.log_posterior_ordinate)) {
        res.diagnostic = "posterior ordinate degenerate (zero-valued density)";
        res.log_marginal = -kInf;
        return res;
    }
    res.log_marginal = res.loglik_at_star + res.logprior_at_star - res.log_posterior_ordinate;
    return res;
}

}  // namespace fclass::uprobit
