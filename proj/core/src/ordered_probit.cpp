#include "fclass/ordered_probit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "fclass/distributions.hpp"

namespace fclass::oprobit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbFloor = 1e-300;

double logsumexp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

/// Precision-form conjugate theta sampler shared by the main and reduced runs.
struct ThetaSampler {
    Eigen::LLT<Eigen::MatrixXd> llt;  // of P = B0^{-1} + Z^T Z
    Eigen::VectorXd prior_term;       // B0^{-1} theta0

    ThetaSampler(const Eigen::MatrixXd& Z, const OrderedProbitPrior& prior) {
        const Eigen::MatrixXd P = prior.B0_inv + Z.transpose() * Z;
        llt.compute(P);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("oprobit::update_theta: posterior precision not positive definite");
        }
        prior_term = prior.B0_inv * prior.theta0;
    }

    Eigen::VectorXd posterior_mean(const Eigen::VectorXd& ZtW) const { return llt.solve(prior_term + ZtW); }

    Eigen::VectorXd draw(const Eigen::VectorXd& ZtW, RngStream& rng) const {
        Eigen::VectorXd xi(prior_term.size());
        for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
        // x = L^{-T} xi has covariance P^{-1}
        Eigen::MatrixXd L = llt.matrixL();
        return posterior_mean(ZtW) + L.transpose().triangularView<Eigen::Upper>().solve(xi);
    }

    double log_ordinate(const Eigen::VectorXd& theta_star, const Eigen::VectorXd& ZtW) const {
        const Eigen::VectorXd mean = posterior_mean(ZtW);
        Eigen::MatrixXd L = llt.matrixL();
        const Eigen::VectorXd u = L.transpose() * (theta_star - mean);
        const double logdet_precision = 2.0 * L.diagonal().array().log().sum();
        return 0.5 * logdet_precision - 0.5 * theta_star.size() * std::log(2.0 * M_PI) - 0.5 * u.squaredNorm();
    }
};

double log_mh_prior(const Eigen::VectorXd& alpha, const OrderedProbitPrior& prior) {
    if (alpha.size() == 0) return 0.0;
    return mvn_logpdf(alpha, prior.alpha0, prior.A0);
}

}  // namespace

OrderedCutpoints gamma_from_alpha(const Eigen::VectorXd& alpha) {
    const int K = static_cast<int>(alpha.size()) + 2;
    OrderedCutpoints cp;
    cp.gamma.resize(K - 1);
    cp.gamma[0] = 0.0;
    double acc = 0.0;
    for (int j = 0; j < alpha.size(); ++j) {
        const double e = std::exp(alpha[j]);
        if (!std::isfinite(e)) {
            throw std::overflow_error("gamma_from_alpha: exp(alpha[" + std::to_string(j + 1) + "]) overflows");
        }
        acc += e;
        cp.gamma[j + 1] = acc;
    }
    return cp;
}

Eigen::VectorXd alpha_from_gamma(const OrderedCutpoints& cutpoints) {
    const auto& g = cutpoints.gamma;
    if (g.size() < 1 || g[0] != 0.0) {
        throw std::invalid_argument("alpha_from_gamma: cutpoints must start at gamma_1 = 0");
    }
    Eigen::VectorXd alpha(g.size() - 1);
    for (Eigen::Index j = 1; j < g.size(); ++j) {
        const double gap = g[j] - g[j - 1];
        if (!(gap > 0.0)) {
            throw std::invalid_argument("alpha_from_gamma: cutpoints must be strictly increasing");
        }
        alpha[j - 1] = std::log(gap);
    }
    return alpha;
}

OrderedProbitPrior OrderedProbitPrior::weakly_informative(int J, int K) {
    OrderedProbitPrior p;
    p.theta0 = Eigen::VectorXd::Zero(J);
    p.B0 = 100.0 * Eigen::MatrixXd::Identity(J, J);
    p.B0_inv = 0.01 * Eigen::MatrixXd::Identity(J, J);
    p.alpha0 = Eigen::VectorXd::Zero(std::max(0, K - 2));
    p.A0 = 10.0 * Eigen::MatrixXd::Identity(std::max(0, K - 2), std::max(0, K - 2));
    return p;
}

OrderedProbitPrior OrderedProbitPrior::diffuse_theta(int J, int K) {
    OrderedProbitPrior p = weakly_informative(J, K);
    p.B0_inv.setZero();
    return p;
}

Eigen::VectorXd OrderedProbitDraws::alpha_mean() const {
    if (alpha.cols() == 0) return Eigen::VectorXd();
    return alpha.colwise().mean();
}

Eigen::VectorXd category_prob(double eta, const OrderedCutpoints& cutpoints) {
    const int K = cutpoints.num_categories();
    Eigen::VectorXd p(K);
    // First and last categories use single CDF evaluations (full tail
    // precision); middle categories are differences.
    p[0] = normal_cdf(cutpoints.gamma[0] - eta);
    if (K >= 2) p[K - 1] = normal_cdf_upper(cutpoints.gamma[K - 2] - eta);
    double prev = p[0];
    for (int k = 1; k + 1 < K; ++k) {
        const double cur = normal_cdf(cutpoints.gamma[k] - eta);
        p[k] = cur - prev;
        prev = cur;
    }
    for (int k = 0; k < K; ++k) p[k] = std::max(p[k], kProbFloor);
    return p;
}

double log_likelihood(const std::vector<int>& labels, const Eigen::VectorXd& eta,
                      const OrderedCutpoints& cutpoints) {
    const int K = cutpoints.num_categories();
    double ll = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        const double e = eta[static_cast<Eigen::Index>(i)];
        double p;
        if (y == 0) {
            p = normal_cdf(cutpoints.gamma[0] - e);
        } else if (y == K - 1) {
            p = normal_cdf_upper(cutpoints.gamma[K - 2] - e);
        } else {
            p = normal_cdf(cutpoints.gamma[y] - e) - normal_cdf(cutpoints.gamma[y - 1] - e);
        }
        ll += std::log(std::max(p, kProbFloor));
    }
    return ll;
}

Eigen::VectorXd update_theta(const Eigen::VectorXd& W, const Eigen::MatrixXd& Z,
                             const OrderedProbitPrior& prior, RngStream& rng) {
    ThetaSampler sampler(Z, prior);
    return sampler.draw(Z.transpose() * W, rng);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> theta_posterior_moments(const Eigen::VectorXd& W,
                                                                    const Eigen::MatrixXd& Z,
                                                                    const OrderedProbitPrior& prior) {
    ThetaSampler sampler(Z, prior);
    const Eigen::Index J = Z.cols();
    const Eigen::MatrixXd Bn = sampler.llt.solve(Eigen::MatrixXd::Identity(J, J));
    return {sampler.posterior_mean(Z.transpose() * W), Bn};
}

Eigen::VectorXd update_W(const Eigen::VectorXd& theta, const OrderedCutpoints& cutpoints,
                         const std::vector<int>& labels, const Eigen::MatrixXd& Z, RngStream& rng) {
    const int K = cutpoints.num_categories();
    const Eigen::VectorXd eta = Z * theta;
    Eigen::VectorXd W(eta.size());
    for (Eigen::Index i = 0; i < W.size(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        const double lo = (y == 0) ? -kInf : cutpoints.gamma[y - 1];
        const double hi = (y == K - 1) ? kInf : cutpoints.gamma[y];
        W[i] = sample_truncnorm(eta[i], 1.0, lo, hi, rng);
    }
    return W;
}

AlphaStepResult update_alpha_mh(const Eigen::VectorXd& alpha, const Eigen::VectorXd& eta,
                                const std::vector<int>& labels, const OrderedProbitPrior& prior,
                                double proposal_scale, RngStream& rng) {
    if (alpha.size() == 0) return {alpha, true};
    Eigen::VectorXd proposal = alpha;
    for (Eigen::Index j = 0; j < alpha.size(); ++j) proposal[j] += proposal_scale * rng.normal();

    const double cur = log_likelihood(labels, eta, gamma_from_alpha(alpha)) + log_mh_prior(alpha, prior);
    const double prop = log_likelihood(labels, eta, gamma_from_alpha(proposal)) + log_mh_prior(proposal, prior);
    const double log_ratio = prop - cur;
    if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) return {proposal, true};
    return {alpha, false};
}

OrderedProbitDraws run_mcmc(const std::vector<int>& labels, int K, const Eigen::MatrixXd& Z,
                            const OrderedProbitPrior& prior, const McmcConfig& config) {
    if (K < 2) throw std::invalid_argument("oprobit::run_mcmc: need K >= 2");
    if (config.burn_in >= config.iterations) {
        throw std::invalid_argument("oprobit::run_mcmc: burn-in must be smaller than iteration count");
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    if (Z.rows() != n) throw std::invalid_argument("oprobit::run_mcmc: label/design size mismatch");
    const int J = static_cast<int>(Z.cols());
    const int G = config.iterations - config.burn_in;

    RngStream rng(config.seed, config.stream);
    ThetaSampler theta_sampler(Z, prior);

    OrderedProbitDraws draws;
    draws.K = K;
    draws.theta.resize(G, J);
    draws.alpha.resize(G, std::max(0, K - 2));
    draws.ZtW.resize(G, J);
    draws.loglik.resize(G);
    if (K >= 3) draws.gamma2_trace.resize(config.iterations);

    Eigen::VectorXd theta = prior.theta0;
    Eigen::VectorXd alpha = prior.alpha0;
    OrderedCutpoints cutpoints = gamma_from_alpha(alpha);
    Eigen::VectorXd eta = Z * theta;
    Eigen::VectorXd W;

    double scale = config.proposal_scale;
    double log_scale = std::log(scale);
    int accepted_post = 0;
    int steps_post = 0;

    for (int it = 0; it < config.iterations; ++it) {
        // alpha-step against the W-marginal likelihood, then W & theta Gibbs.
        if (K >= 3) {
            auto step = update_alpha_mh(alpha, eta, labels, prior, scale, rng);
            alpha = step.alpha;
            cutpoints = gamma_from_alpha(alpha);
            if (config.adapt_proposal && it < config.burn_in) {
                const double lr = 1.0 / std::sqrt(1.0 + it);
                log_scale += lr * ((step.accepted ? 1.0 : 0.0) - config.target_acceptance);
                scale = std::exp(std::clamp(log_scale, -12.0, 4.0));
            } else {
                accepted_post += step.accepted ? 1 : 0;
                ++steps_post;
            }
        }
        W = update_W(theta, cutpoints, labels, Z, rng);
        const Eigen::VectorXd ZtW = Z.transpose() * W;
        theta = theta_sampler.draw(ZtW, rng);
        eta = Z * theta;

        if (K >= 3) draws.gamma2_trace[it] = cutpoints.gamma[1];

        if (it >= config.burn_in) {
            const int g = it - config.burn_in;
            draws.theta.row(g) = theta.transpose();
            if (K >= 3) draws.alpha.row(g) = alpha.transpose();
            draws.ZtW.row(g) = ZtW.transpose();
            const double ll = log_likelihood(labels, eta, cutpoints);
            if (!std::isfinite(ll)) {
                throw std::runtime_error("oprobit::run_mcmc: divergent state (non-finite log-likelihood) at iteration " +
                                         std::to_string(it));
            }
            draws.loglik[g] = ll;
        }
    }
    draws.final_W = W;
    draws.frozen_scale = scale;
    draws.acceptance_rate = (steps_post > 0) ? static_cast<double>(accepted_post) / steps_post : 1.0;
    return draws;
}

ChibResult log_marginal_likelihood(const OrderedProbitDraws& draws, const std::vector<int>& labels,
                                   const Eigen::MatrixXd& Z, const OrderedProbitPrior& prior,
                                   const ChibConfig& config) {
    if (draws.theta.rows() == 0) throw std::invalid_argument("oprobit::log_marginal_likelihood: empty draws");
    if (prior.B0_inv.isZero(0.0)) {
        throw std::invalid_argument("oprobit::log_marginal_likelihood: requires a proper prior on theta");
    }
    const int K = draws.K;
    const int G = static_cast<int>(draws.theta.rows());
    const int M = (config.reduced_draws > 0) ? config.reduced_draws : G;
    const double scale = draws.frozen_scale;

    const Eigen::VectorXd theta_star = draws.theta_mean();
    const Eigen::VectorXd alpha_star = draws.alpha_mean();
    const OrderedCutpoints cut_star = gamma_from_alpha(alpha_star);

    ChibResult res;
    res.loglik_at_star = log_likelihood(labels, Z * theta_star, cut_star);
    res.logprior_at_star = mvn_logpdf(theta_star, prior.theta0, prior.B0) + log_mh_prior(alpha_star, prior);

    RngStream rng(config.seed, config.stream);
    ThetaSampler theta_sampler(Z, prior);

    const double log_prior_star = log_mh_prior(alpha_star, prior);
    const int q_dim = std::max(0, K - 2);

    double log_theta_ordinate;
    Eigen::VectorXd denom_terms(K >= 3 ? M : 0);
    if (K == 2) {
        // Single-block Chib (1995): Rao-Blackwellize over the main-run W draws.
        Eigen::VectorXd terms(G);
        for (int g = 0; g < G; ++g) {
            terms[g] = theta_sampler.log_ordinate(theta_star, draws.ZtW.row(g).transpose());
        }
        log_theta_ordinate = logsumexp(terms) - std::log(static_cast<double>(G));
    } else {
        // Reduced run with alpha fixed at alpha_star; alternate W-step then
        // theta-step. Supplies W^{(m)} for the theta ordinate and theta^{(m)}
        // for the Chib-Jeliazkov denominator.
        Eigen::VectorXd theta = theta_star;
        Eigen::VectorXd theta_ordinate_terms(M);
        for (int m = 0; m < M; ++m) {
            const Eigen::VectorXd W = update_W(theta, cut_star, labels, Z, rng);
            const Eigen::VectorXd ZtW = Z.transpose() * W;
            theta = theta_sampler.draw(ZtW, rng);
            theta_ordinate_terms[m] = theta_sampler.log_ordinate(theta_star, ZtW);

            // alpha^{(m)} ~ q(alpha_star, .); rho(alpha_star -> alpha^{(m)} | theta^{(m)})
            Eigen::VectorXd alpha_m(q_dim);
            for (int j = 0; j < q_dim; ++j) alpha_m[j] = alpha_star[j] + scale * rng.normal();
            const Eigen::VectorXd eta_m = Z * theta;
            const double cur = log_likelihood(labels, eta_m, cut_star) + log_prior_star;
            const double prop =
                log_likelihood(labels, eta_m, gamma_from_alpha(alpha_m)) + log_mh_prior(alpha_m, prior);
            denom_terms[m] = std::min(0.0, prop - cur);
        }
        log_theta_ordinate = logsumexp(theta_ordinate_terms) - std::log(static_cast<double>(M));
    }

    double log_alpha_ordinate = 0.0;
    if (K >= 3) {
        // Numerator over the main run: rho(alpha^{(g)} -> alpha_star | theta^{(g)})
        // times the proposal density q(alpha^{(g)}, alpha_star).
        Eigen::VectorXd num_terms(G);
        const double q_norm = -0.5 * q_dim * std::log(2.0 * M_PI) - q_dim * std::log(scale);
        for (int g = 0; g < G; ++g) {
            const Eigen::VectorXd alpha_g = draws.alpha.row(g).transpose();
            const Eigen::VectorXd theta_g = draws.theta.row(g).transpose();
            const Eigen::VectorXd eta_g = Z * theta_g;
            const double cur = log_likelihood(labels, eta_g, gamma_from_alpha(alpha_g)) + log_mh_prior(alpha_g, prior);
            const double prop = log_likelihood(labels, eta_g, cut_star) + log_prior_star;
            const double log_rho = std::min(0.0, prop - cur);
            const double log_q = q_norm - 0.5 * (alpha_star - alpha_g).squaredNorm() / (scale * scale);
            num_terms[g] = log_rho + log_q;
        }
        const double log_num = logsumexp(num_terms) - std::log(static_cast<double>(G));
        const double log_den = logsumexp(denom_terms) - std::log(static_cast<double>(M));
        if (!std::isfinite(log_num) || !std::isfinite(log_den)) {
            res.diagnostic = "alpha ordinate estimate degenerate (zero-valued density)";
            res.log_marginal = -kInf;
            return res;
        }
        log_alpha_ordinate = log_num - log_den;
    }

    res.log_posterior_ordinate = log_alpha_ordinate + log_theta_ordinate;
    if (!std::isfinite(res.log_posterior_ordinate)) {
        res.diagnostic = "posterior ordinate degenerate (zero-valued density)";
        res.log_marginal = -kInf;
        return res;
    }
    res.log_marginal = res.loglik_at_star + res.logprior_at_star - res.log_posterior_ordinate;
    return res;
}

}  // namespace fclass::oprobit
