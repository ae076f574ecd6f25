#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fclass/rng.hpp"

namespace fclass::mlogit {

/// Block coefficients theta_1..theta_{K-1} as columns of a J x (K-1) matrix;
/// theta_K = 0 is implicit.
struct LogisticPrior {
    std::vector<Eigen::VectorXd> mu;     // per block, length J
    std::vector<Eigen::MatrixXd> sigma;  // per block, J x J SPD

    /// mu_k = 0, Sigma_k = 100 I for every block.
    static LogisticPrior weakly_informative(int J, int K);
};

struct McmcConfig {
    int iterations = 5000;
    int burn_in = 1000;
    double proposal_scale = 0.1;
    bool adapt_proposal = true;
    double target_acceptance = 0.25;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

struct LogisticDraws {
    std::vector<Eigen::MatrixXd> theta;   // per block: G x J
    Eigen::VectorXd loglik;               // G
    std::vector<double> acceptance_rate;  // per block, post-adaptation
    std::vector<double> frozen_scale;     // per block
    Eigen::MatrixXd final_state;          // J x (K-1)
    int K = 0;

    Eigen::MatrixXd theta_mean() const;  // J x (K-1)
};

/// Softmax over (eta_1, ..., eta_{K-1}, 0) with max subtraction.
Eigen::VectorXd category_prob(const Eigen::VectorXd& eta);

double log_likelihood(const std::vector<int>& labels, const Eigen::MatrixXd& Eta);

/// One random-walk MH step on block k (0-based); returns acceptance. `Theta`
/// and its cached linear predictor `Eta` are updated in place on acceptance.
bool update_block_mh(int k, Eigen::MatrixXd& Theta, Eigen::MatrixXd& Eta, const std::vector<int>& labels,
                     const Eigen::MatrixXd& Z, const LogisticPrior& prior, double proposal_scale,
                     RngStream& rng);

LogisticDraws run_mcmc(const std::vector<int>& labels, int K, const Eigen::MatrixXd& Z,
                       const LogisticPrior& prior, const McmcConfig& config);

struct ChibResult {
    double log_marginal = 0.0;
    double loglik_at_star = 0.0;
    double logprior_at_star = 0.0;
    double log_posterior_ordinate = 0.0;
    std::vector<double> block_ordinates;
    std::string diagnostic;
};

struct ChibConfig {
    int reduced_draws = 0;    // 0: use G
    int reduced_burn_in = 200;
    std::uint64_t seed = 0;
    std::uint64_t stream = 1;
};

/// Chib-Jeliazkov (2001) multi-block estimate: the posterior ordinate
/// telescopes over blocks, each factor estimated from one reduced pass with
/// the earlier blocks pinned at their posterior means.
ChibResult log_marginal_likelihood(const LogisticDraws& draws, const std::vector<int>& labels,
                                   const Eigen::MatrixXd& Z, const LogisticPrior& prior,
                                   const ChibConfig& config = {});

}  // namespace fclass::mlogit
