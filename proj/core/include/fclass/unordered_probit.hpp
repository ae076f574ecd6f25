#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fclass/distributions.hpp"
#include "fclass/rng.hpp"

namespace fclass::uprobit {

/// The fixed contrast covariance of the differenced utilities: 2 on the
/// diagonal, 1 off-diagonal, (K-1) x (K-1). Known, never estimated.
Eigen::MatrixXd contrast_sigma(int K);

struct UnorderedProbitPrior {
    Eigen::MatrixXd U0;      // J x (K-1)
    Eigen::MatrixXd V0;      // J x J row covariance
    Eigen::MatrixXd V0_inv;  // zero matrix encodes the diffuse limit

    /// U0 = 0, V0 = 100 I.
    static UnorderedProbitPrior weakly_informative(int J, int K);
    static UnorderedProbitPrior diffuse(int J, int K);
};

struct McmcConfig {
    int iterations = 5000;
    int burn_in = 1000;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    int loglik_every = 10;
    int quadrature_order = 32;
};

struct UnorderedProbitDraws {
    std::vector<Eigen::MatrixXd> Theta;  // G matrices, J x (K-1)
    std::vector<Eigen::MatrixXd> ZtW;    // G matrices, J x (K-1): Z^T W^{(g)}
    Eigen::VectorXd loglik;              // exact categorical log-likelihood, sampled every loglik_every iters
    std::vector<int> loglik_iters;
    Eigen::MatrixXd final_W;             // n x (K-1)
    int K = 0;

    Eigen::MatrixXd theta_mean() const;
};

/// Quadrature rule that makes the Dunnett one-dimensional reduction exact in
/// the limit: generalized Gauss-Laguerre with alpha = -1/2 (weights
/// normalized by Gamma(1/2)), so that P(Y=l) = 1/2 sum_q w_q {prod_k
/// Phi(-sqrt(2 x_q) - m_k) + prod_k Phi(sqrt(2 x_q) - m_k)}.
GaussLaguerreRule dunnett_rule(int order = 32);

/// Category probabilities via the Dunnett reduction. `eta` is z^T Theta (a
/// (K-1)-vector). The returned vector is renormalized to sum exactly to one;
/// if `defect` is non-null it receives |pre-normalization sum - 1|.
Eigen::VectorXd category_prob(const Eigen::VectorXd& eta, const GaussLaguerreRule& quad,
                              double* defect = nullptr);

double log_likelihood(const std::vector<int>& labels, const Eigen::MatrixXd& Eta,
                      const GaussLaguerreRule& quad);

/// Conjugate update (Theta | W): MN(U_n, V_n, Sigma) with
/// V_n = (Z^T Z + V0^{-1})^{-1}, U_n = V_n (Z^T W + V0^{-1} U0).
Eigen::MatrixXd update_Theta(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Z,
                             const UnorderedProbitPrior& prior, RngStream& rng);

/// One full sweep of single-site truncated-normal updates of W, in place.
void update_W(Eigen::MatrixXd& W, const Eigen::MatrixXd& Theta, const std::vector<int>& labels,
              const Eigen::MatrixXd& Z, RngStream& rng);

/// Row-level label consistency: if Y_i = l < K then W_il > max(W_{i,-l}, 0);
/// if Y_i = K then all W_il < 0.
bool latent_consistent(const Eigen::MatrixXd& W, const std::vector<int>& labels);

UnorderedProbitDraws run_mcmc(const std::vector<int>& labels, int K, const Eigen::MatrixXd& Z,
                              const UnorderedProbitPrior& prior, const McmcConfig& config);

struct ChibResult {
    double log_marginal = 0.0;
    double loglik_at_star = 0.0;
    double logprior_at_star = 0.0;
    double log_posterior_ordinate = 0.0;
    std::string diagnostic;
};

/// Chib (1995) estimate: single parameter block, so the posterior ordinate
/// averages the full-conditional matrix-normal density over the main-run
/// Gibbs draws of W. No reduced run.
ChibResult log_marginal_likelihood(const UnorderedProbitDraws& draws, const std::vector<int>& labels,
                                   const Eigen::MatrixXd& Z, const UnorderedProbitPrior& prior,
                                   const GaussLaguerreRule& quad);

}  // namespace fclass::uprobit
