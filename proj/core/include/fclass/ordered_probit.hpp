#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fclass/rng.hpp"

namespace fclass::oprobit {

/// Cut-points (gamma_1, ..., gamma_{K-1}) with gamma_1 = 0; gamma_0 = -inf
/// and gamma_K = +inf are implicit.
struct OrderedCutpoints {
    Eigen::VectorXd gamma;
    int num_categories() const { return static_cast<int>(gamma.size()) + 1; }
};

/// Unconstrained reparameterization: alpha_1 = log gamma_2,
/// alpha_j = log(gamma_{j+1} - gamma_j). Empty for K = 2.
OrderedCutpoints gamma_from_alpha(const Eigen::VectorXd& alpha);
Eigen::VectorXd alpha_from_gamma(const OrderedCutpoints& cutpoints);

struct OrderedProbitPrior {
    Eigen::VectorXd theta0;
    Eigen::MatrixXd B0;
    Eigen::MatrixXd B0_inv;  // zero matrix encodes the diffuse limit
    Eigen::VectorXd alpha0;
    Eigen::MatrixXd A0;

    /// theta0 = 0, B0 = 100 I; alpha0 = 0, A0 = 10 I.
    static OrderedProbitPrior weakly_informative(int J, int K);
    static OrderedProbitPrior diffuse_theta(int J, int K);
};

struct McmcConfig {
    int iterations = 5000;
    int burn_in = 1000;
    double proposal_scale = 0.1;
    bool adapt_proposal = true;           // Robbins-Monro during burn-in, frozen after
    double target_acceptance = 0.35;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    int loglik_every = 1;
};

struct OrderedProbitDraws {
    Eigen::MatrixXd theta;      // G x J
    Eigen::MatrixXd alpha;      // G x (K-2)
    Eigen::MatrixXd ZtW;        // G x J, Z^T W per retained draw (theta-ordinate statistic)
    Eigen::VectorXd loglik;     // G
    Eigen::VectorXd gamma2_trace;  // all iterations incl. burn-in; empty for K = 2
    Eigen::VectorXd final_W;
    double acceptance_rate = 1.0;  // post-adaptation; 1 for K = 2 (no MH block)
    double frozen_scale = 0.0;
    int K = 0;

    Eigen::VectorXd theta_mean() const { return theta.colwise().mean(); }
    Eigen::VectorXd alpha_mean() const;
};

/// P(Y = k) for k = 1..K: Phi(gamma_k - eta) - Phi(gamma_{k-1} - eta).
/// Probabilities are clamped below at 1e-300 for log-likelihood use.
Eigen::VectorXd category_prob(double eta, const OrderedCutpoints& cutpoints);

double log_likelihood(const std::vector<int>& labels, const Eigen::VectorXd& eta,
                      const OrderedCutpoints& cutpoints);

/// Conjugate update (theta | W): N(theta_n, B_n) with
/// B_n = (B0^{-1} + Z^T Z)^{-1}, theta_n = B_n (B0^{-1} theta0 + Z^T W).
Eigen::VectorXd update_theta(const Eigen::VectorXd& W, const Eigen::MatrixXd& Z,
                             const OrderedProbitPrior& prior, RngStream& rng);

/// The closed-form conditional moments behind update_theta.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> theta_posterior_moments(const Eigen::VectorXd& W,
                                                                    const Eigen::MatrixXd& Z,
                                                                    const OrderedProbitPrior& prior);

/// Latent update: W_i ~ TN(Z_i theta, 1, gamma_{Y_i - 1}, gamma_{Y_i}).
Eigen::VectorXd update_W(const Eigen::VectorXd& theta, const OrderedCutpoints& cutpoints,
                         const std::vector<int>& labels, const Eigen::MatrixXd& Z, RngStream& rng);

/// One random-walk MH step on alpha against the marginal likelihood
/// f(Y | alpha, theta) times the normal prior. No-op for K = 2.
struct AlphaStepResult {
    Eigen::VectorXd alpha;
    bool accepted = true;
};
AlphaStepResult update_alpha_mh(const Eigen::VectorXd& alpha, const Eigen::VectorXd& eta,
                                const std::vector<int>& labels, const OrderedProbitPrior& prior,
                                double proposal_scale, RngStream& rng);

OrderedProbitDraws run_mcmc(const std::vector<int>& labels, int K, const Eigen::MatrixXd& Z,
                            const OrderedProbitPrior& prior, const McmcConfig& config);

struct ChibResult {
    double log_marginal = 0.0;
    double loglik_at_star = 0.0;
    double logprior_at_star = 0.0;
    double log_posterior_ordinate = 0.0;
    std::string diagnostic;
};

struct ChibConfig {
    int reduced_draws = 0;  // 0: use G
    std::uint64_t seed = 0;
    std::uint64_t stream = 1;
};

/// Chib (1995) / Chib-Jeliazkov (2001) estimate of log m(Y | J) at the
/// posterior mean, with a reduced run holding alpha fixed at its mean.
ChibResult log_marginal_likelihood(const OrderedProbitDraws& draws, const std::vector<int>& labels,
                                   const Eigen::MatrixXd& Z, const OrderedProbitPrior& prior,
                                   const ChibConfig& config = {});

}  // namespace fclass::oprobit
