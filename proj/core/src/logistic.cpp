#include "fclass/logistic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fclass/distributions.hpp"

namespace fclass::mlogit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logsumexp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

double log_block_prior(const Eigen::VectorXd& theta_k, const LogisticPrior& prior, int k) {
    return mvn_logpdf(theta_k, prior.mu[static_cast<std::size_t>(k)], prior.sigma[static_cast<std::size_t>(k)]);
}

}  // namespace

LogisticPrior LogisticPrior::weakly_informative(int J, int K) {
    LogisticPrior p;
    p.mu.assign(static_cast<std::size_t>(K - 1), Eigen::VectorXd::Zero(J));
    p.sigma.assign(static_cast<std::size_t>(K - 1), 100.0 * Eigen::MatrixXd::Identity(J, J));
    return p;
}

Eigen::MatrixXd LogisticDraws::theta_mean() const {
    const auto blocks = static_cast<int>(theta.size());
    if (blocks == 0) return {};
    Eigen::MatrixXd m(theta.front().cols(), blocks);
    for (int k = 0; k < blocks; ++k) m.col(k) = theta[static_cast<std::size_t>(k)].colwise().mean().transpose();
    return m;
}

Eigen::VectorXd category_prob(const Eigen::VectorXd& eta) {
    const int K = static_cast<int>(eta.size()) + 1;
    Eigen::VectorXd logits(K);
    logits.head(K - 1) = eta;
    logits[K - 1] = 0.0;
    const double m = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - m).exp();
    return p / p.sum();
}

double log_likelihood(const std::vector<int>& labels, const Eigen::MatrixXd& Eta) {
    const int K = static_cast<int>(Eta.cols()) + 1;
    double ll = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto row = Eta.row(static_cast<Eigen::Index>(i));
        double m = 0.0;
        for (int k = 0; k < K - 1; ++k) m = std::max(m, row[k]);
        double denom = std::exp(-m);  // the implicit zero logit
        for (int k = 0; k < K - 1; ++k) denom += std::exp(row[k] - m);
        const int y = labels[i];
        const double logit_y = (y == K - 1) ? 0.0 : row[y];
        ll += (logit_y - m) - std::log(denom);
    }
    return ll;
}

bool update_block_mh(int k, Eigen::MatrixXd& Theta, Eigen::MatrixXd& Eta, const std::vector<int>& labels,
                     const Eigen::MatrixXd& Z, const LogisticPrior& prior, double proposal_scale,
                     RngStream& rng) {
    const Eigen::VectorXd theta_k = Theta.col(k);
    Eigen::VectorXd proposal = theta_k;
    for (Eigen::Index j = 0; j < proposal.size(); ++j) proposal[j] += proposal_scale * rng.normal();

    const double cur = log_likelihood(labels, Eta) + log_block_prior(theta_k, prior, k);
    Eigen::MatrixXd Eta_prop = Eta;
    Eta_prop.col(k) = Z * proposal;
    const double prop = log_likelihood(labels, Eta_prop) + log_block_prior(proposal, prior, k);
    const double log_ratio = prop - cur;
    if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
        Theta.col(k) = proposal;
        Eta.col(k) = Eta_prop.col(k);
        return true;
    }
    return false;
}

LogisticDraws run_mcmc(const std::vector<int>& labels, int K, const Eigen::MatrixXd& Z,
                       const LogisticPrior& prior, const McmcConfig& config) {
    if (K < 2) throw std::invalid_argument("mlogit::run_mcmc: need K >= 2");
    if (config.burn_in >= config.iterations) {
        throw std::invalid_argument("mlogit::run_mcmc: burn-in must be smaller than iteration count");
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (Z.rows() != n) throw std::invalid_argument("mlogit::run_mcmc: label/design size mismatch");
    const int J = static_cast<int>(Z.cols());
    const int B = K - 1;
    const int G = config.iterations - config.burn_in;

    RngStream rng(config.seed, config.stream);

    LogisticDraws draws;
    draws.K = K;
    draws.theta.assign(static_cast<std::size_t>(B), Eigen::MatrixXd(G, J));
    draws.loglik.resize(G);
    draws.acceptance_rate.assign(static_cast<std::size_t>(B), 0.0);
    draws.frozen_scale.assign(static_cast<std::size_t>(B), config.proposal_scale);

    Eigen::MatrixXd Theta = Eigen::MatrixXd::Zero(J, B);
    Eigen::MatrixXd Eta = Z * Theta;
    std::vector<double> log_scale(static_cast<std::size_t>(B), std::log(config.proposal_scale));
    std::vector<int> accepted(static_cast<std::size_t>(B), 0);
    std::vector<int> steps(static_cast<std::size_t>(B), 0);

    for (int it = 0; it < config.iterations; ++it) {
        for (int k = 0; k < B; ++k) {
            const bool acc =
                update_block_mh(k, Theta, Eta, labels, Z, prior, draws.frozen_scale[static_cast<std::size_t>(k)], rng);
            if (config.adapt_proposal && it < config.burn_in) {
                const double lr = 1.0 / std::sqrt(1.0 + it);
                log_scale[static_cast<std::size_t>(k)] += lr * ((acc ? 1.0 : 0.0) - config.target_acceptance);
                draws.frozen_scale[static_cast<std::size_t>(k)] =
                    std::exp(std::clamp(log_scale[static_cast<std::size_t>(k)], -12.0, 4.0));
            } else {
                accepted[static_cast<std::size_t>(k)] += acc ? 1 : 0;
                ++steps[static_cast<std::size_t>(k)];
            }
        }
        if (it >= config.burn_in) {
            const int g = it - config.burn_in;
            for (int k = 0; k < B; ++k) draws.theta[static_cast<std::size_t>(k)].row(g) = Theta.col(k).transpose();
            const double ll = log_likelihood(labels, Eta);
            if (!std::isfinite(ll)) {
                throw std::runtime_error("mlogit::run_mcmc: divergent state at iteration " + std::to_string(it));
            }
            draws.loglik[g] = ll;
        }
    }
    for (int k = 0; k < B; ++k) {
        draws.acceptance_rate[static_cast<std::size_t>(k)] =
            (steps[static_cast<std::size_t>(k)] > 0)
                ? static_cast<double>(accepted[static_cast<std::size_t>(k)]) / steps[static_cast<std::size_t>(k)]
                : 1.0;
    }
    draws.final_state = Theta;
    return draws;
}

ChibResult log_marginal_likelihood(const LogisticDraws& draws, const std::vector<int>& labels,
                                   const Eigen::MatrixXd& Z, const LogisticPrior& prior,
                                   const ChibConfig& config) {
    const int B = static_cast<int>(draws.theta.size());
    if (B == 0 || draws.theta.front().rows() == 0) {
        throw std::invalid_argument("mlogit::log_marginal_likelihood: empty draws");
    }
    const int G = static_cast<int>(draws.theta.front().rows());
    const int M = (config.reduced_draws > 0) ? config.reduced_draws : G;
    const Eigen::MatrixXd Theta_star = draws.theta_mean();  // J x B

    ChibResult res;
    res.loglik_at_star = log_likelihood(labels, Z * Theta_star);
    res.logprior_at_star = 0.0;
    for (int k = 0; k < B; ++k) res.logprior_at_star += log_block_prior(Theta_star.col(k), prior, k);

    RngStream rng(config.seed, config.stream);

    // rho(theta_k -> theta_k' | rest): log acceptance probability of the
    // sampler's move with the other blocks held at the columns of `Theta`.
    auto log_rho = [&](Eigen::MatrixXd& Theta, Eigen::MatrixXd& Eta, int k, const Eigen::VectorXd& from,
                       const Eigen::VectorXd& to) {
        Theta.col(k) = from;
        Eta.col(k) = Z * from;
        const double cur = log_likelihood(labels, Eta) + log_block_prior(from, prior, k);
        Theta.col(k) = to;
        Eta.col(k) = Z * to;
        const double prop = log_likelihood(labels, Eta) + log_block_prior(to, prior, k);
        return std::min(0.0, prop - cur);
    };

    res.block_ordinates.assign(static_cast<std::size_t>(B), 0.0);

    // Numerator draws for block i come from the run with blocks < i pinned:
    // the main run for i = 0, then successive reduced runs. `chain` carries
    // the draws of the free blocks of the current run.
    std::vector<Eigen::MatrixXd> chain(static_cast<std::size_t>(B));  // per block: draws x J
    for (int k = 0; k < B; ++k) chain[static_cast<std::size_t>(k)] = draws.theta[static_cast<std::size_t>(k)];
    int chain_len = G;

    Eigen::MatrixXd work_Theta = Theta_star;
    Eigen::MatrixXd work_Eta = Z * work_Theta;

    for (int i = 0; i < B; ++i) {
        const double scale = draws.frozen_scale[static_cast<std::size_t>(i)];
        const int J = static_cast<int>(Theta_star.rows());
        const double q_norm = -0.5 * J * std::log(2.0 * M_PI) - J * std::log(scale);

        // Numerator: draws of (theta_i, Psi^{i+1}) with Psi_{i-1} = starred.
        Eigen::VectorXd num_terms(chain_len);
        for (int g = 0; g < chain_len; ++g) {
            for (int k = 0; k < i; ++k) work_Theta.col(k) = Theta_star.col(k);
            for (int k = i; k < B; ++k) work_Theta.col(k) = chain[static_cast<std::size_t>(k)].row(g).transpose();
            work_Eta = Z * work_Theta;
            const Eigen::VectorXd theta_ig = chain[static_cast<std::size_t>(i)].row(g).transpose();
            const double lr = log_rho(work_Theta, work_Eta, i, theta_ig, Theta_star.col(i));
            const double log_q = q_norm - 0.5 * (Theta_star.col(i) - theta_ig).squaredNorm() / (scale * scale);
            num_terms[g] = lr + log_q;
        }
        const double log_num = logsumexp(num_terms) - std::log(static_cast<double>(chain_len));

        // Denominator draws: blocks <= i pinned, blocks > i sampled; theta_i
        // proposals are drawn fresh from q(theta_i* , .).
        Eigen::VectorXd den_terms(M);
        if (i < B - 1) {
            // Reduced MCMC run for Psi^{i+1} | Psi*_i.
            Eigen::MatrixXd red_Theta = Theta_star;
            Eigen::MatrixXd red_Eta = Z * red_Theta;
            std::vector<Eigen::MatrixXd> next_chain(static_cast<std::size_t>(B));
            for (int k = i + 1; k < B; ++k) next_chain[static_cast<std::size_t>(k)] = Eigen::MatrixXd(M, J);
            for (int it = 0; it < config.reduced_burn_in + M; ++it) {
                for (int k = i + 1; k < B; ++k) {
                    update_block_mh(k, red_Theta, red_Eta, labels, Z, prior,
                                    draws.frozen_scale[static_cast<std::size_t>(k)], rng);
                }
                if (it >= config.reduced_burn_in) {
                    const int m = it - config.reduced_burn_in;
                    for (int k = i + 1; k < B; ++k) {
                        next_chain[static_cast<std::size_t>(k)].row(m) = red_Theta.col(k).transpose();
                    }
                    Eigen::VectorXd prop(J);
                    for (int j = 0; j < J; ++j) prop[j] = Theta_star(j, i) + scale * rng.normal();
                    work_Theta = red_Theta;
                    for (int k = 0; k <= i; ++k) work_Theta.col(k) = Theta_star.col(k);
                    work_Eta = Z * work_Theta;
                    den_terms[m] = log_rho(work_Theta, work_Eta, i, Theta_star.col(i), prop);
                }
            }
            chain = std::move(next_chain);
            chain_len = M;
        } else {
            // Last block: every other block is pinned; only proposal draws.
            work_Theta = Theta_star;
            work_Eta = Z * work_Theta;
            for (int m = 0; m < M; ++m) {
                Eigen::VectorXd prop(J);
                for (int j = 0; j < J; ++j) prop[j] = Theta_star(j, i) + scale * rng.normal();
                den_terms[m] = log_rho(work_Theta, work_Eta, i, Theta_star.col(i), prop);
            }
        }
        const double log_den = logsumexp(den_terms) - std::log(static_cast<double>(M));
        if (!std::isfinite(log_num) || !std::isfinite(log_den)) {
            res.diagnostic = "block " + std::to_string(i + 1) + " ordinate degenerate (zero-valued density)";
            res.log_marginal = -kInf;
            return res;
        }
        res.block_ordinates[static_cast<std::size_t>(i)] = log_num - log_den;
        res.log_posterior_ordinate += log_num - log_den;
    }

    res.log_marginal = res.loglik_at_star + res.logprior_at_star - res.log_posterior_ordinate;
    return res;
}

}  // namespace fclass::mlogit
