#include "fclass/discriminant.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fclass/distributions.hpp"

namespace fclass::discriminant {

namespace {

Eigen::VectorXd class_mean(const std::vector<Eigen::VectorXd>& scores) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(scores.front().size());
    for (const auto& f : scores) m += f;
    return m / static_cast<double>(scores.size());
}

}  // namespace

NiwPrior NiwPrior::default_for(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class) {
    std::size_t n = 0;
    Eigen::VectorXd sum;
    for (const auto& cls : scores_by_class) {
        for (const auto& f : cls) {
            if (sum.size() == 0) sum = Eigen::VectorXd::Zero(f.size());
            sum += f;
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("NiwPrior::default_for: no scores");
    const auto m = static_cast<int>(sum.size());
    NiwPrior p;
    p.mu0 = sum / static_cast<double>(n);
    p.kappa0 = 1.0;
    p.nu0 = m + 2;
    p.Lambda0 = Eigen::MatrixXd::Identity(m, m);
    return p;
}

LdaPosterior fit_lda_posterior(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class,
                               const NiwPrior& prior) {
    const auto K = scores_by_class.size();
    if (K == 0) throw std::invalid_argument("fit_lda_posterior: no classes");
    std::size_t n = 0;
    for (const auto& cls : scores_by_class) {
        if (cls.empty()) throw std::invalid_argument("fit_lda_posterior: every class must be nonempty");
        n += cls.size();
    }
    const auto m = prior.mu0.size();

    LdaPosterior post;
    post.nu_n = prior.nu0 + static_cast<double>(n);
    post.kappa_n = prior.kappa0 + static_cast<double>(n);
    post.Lambda_n = prior.Lambda0;
    post.mu_n.resize(K);
    for (std::size_t l = 0; l < K; ++l) {
        const auto n_l = static_cast<double>(scores_by_class[l].size());
        const Eigen::VectorXd fbar = class_mean(scores_by_class[l]);
        // pooled within-class scatter
        for (const auto& f : scores_by_class[l]) {
            const Eigen::VectorXd d = f - fbar;
            post.Lambda_n += d * d.transpose();
        }
        const Eigen::VectorXd d0 = fbar - prior.mu0;
        post.Lambda_n += (prior.kappa0 * n_l / (prior.kappa0 + n_l)) * (d0 * d0.transpose());
        post.mu_n[l] = (prior.kappa0 * prior.mu0 + n_l * fbar) / (prior.kappa0 + n_l);
        if (post.mu_n[l].size() != m) throw std::invalid_argument("fit_lda_posterior: score dimension mismatch");
    }
    return post;
}

LdaPosterior::Draw LdaPosterior::sample(RngStream& rng) const {
    Draw d;
    d.sigma = sample_inverse_wishart(nu_n, Lambda_n, rng);
    d.mu.resize(mu_n.size());
    for (std::size_t l = 0; l < mu_n.size(); ++l) {
        d.mu[l] = sample_mvn(mu_n[l], d.sigma / kappa_n, rng);
    }
    return d;
}

QdaPosterior fit_qda_posterior(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class,
                               const std::vector<NiwPrior>& priors) {
    const auto K = scores_by_class.size();
    if (K == 0) throw std::invalid_argument("fit_qda_posterior: no classes");
    if (priors.size() != K) throw std::invalid_argument("fit_qda_posterior: need one prior per class");

    QdaPosterior post;
    post.nu_n.resize(K);
    post.Lambda_n.resize(K);
    post.kappa_n.resize(K);
    post.mu_n.resize(K);
    for (std::size_t l = 0; l < K; ++l) {
        const auto& cls = scores_by_class[l];
        if (cls.empty()) throw std::invalid_argument("fit_qda_posterior: every class must be nonempty");
        const auto& prior = priors[l];
        const auto n_l = static_cast<double>(cls.size());
        const Eigen::VectorXd fbar = class_mean(cls);
        Eigen::MatrixXd S_l = Eigen::MatrixXd::Zero(prior.mu0.size(), prior.mu0.size());
        for (const auto& f : cls) {
            const Eigen::VectorXd d = f - fbar;
            S_l += d * d.transpose();
        }
        const Eigen::VectorXd d0 = fbar - prior.mu0;
        post.nu_n[l] = prior.nu0 + n_l;
        post.Lambda_n[l] =
            prior.Lambda0 + S_l + (prior.kappa0 * n_l / (prior.kappa0 + n_l)) * (d0 * d0.transpose());
        post.kappa_n[l] = prior.kappa0 + n_l;
        post.mu_n[l] = (prior.kappa0 * prior.mu0 + n_l * fbar) / (prior.kappa0 + n_l);
    }
    return post;
}

QdaPosterior::Draw QdaPosterior::sample(RngStream& rng) const {
    Draw d;
    const auto K = mu_n.size();
    d.sigma.resize(K);
    d.mu.resize(K);
    for (std::size_t l = 0; l < K; ++l) {
        d.sigma[l] = sample_inverse_wishart(nu_n[l], Lambda_n[l], rng);
        d.mu[l] = sample_mvn(mu_n[l], d.sigma[l] / kappa_n[l], rng);
    }
    return d;
}

Eigen::VectorXd predict_prob(const Eigen::VectorXd& score, const std::vector<Eigen::VectorXd>& mu,
                             const std::vector<Eigen::MatrixXd>& sigma, const Eigen::VectorXd& class_prior) {
    const auto K = static_cast<Eigen::Index>(mu.size());
    if (class_prior.size() != K) throw std::invalid_argument("predict_prob: class prior size mismatch");
    Eigen::VectorXd logp(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& S = sigma.size() == 1 ? sigma[0] : sigma[static_cast<std::size_t>(k)];
        logp[k] = (class_prior[k] > 0.0 ? std::log(class_prior[k])
                                        : -std::numeric_limits<double>::infinity()) +
                  mvn_logpdf(score, mu[static_cast<std::size_t>(k)], S);
    }
    const double m = logp.maxCoeff();
    Eigen::VectorXd p = (logp.array() - m).exp();
    return p / p.sum();
}

Eigen::VectorXd empirical_class_prior(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(scores_by_class.size()));
    double n = 0.0;
    for (std::size_t l = 0; l < scores_by_class.size(); ++l) {
        p[static_cast<Eigen::Index>(l)] = static_cast<double>(scores_by_class[l].size());
        n += p[static_cast<Eigen::Index>(l)];
    }
    return p / n;
}

}  // namespace fclass::discriminant
