#include "fclass/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace fclass {

namespace {

double logsumexp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

JPrior renormalize(std::vector<int> support, Eigen::VectorXd raw_log_mass) {
    JPrior prior;
    prior.support = std::move(support);
    const double total = logsumexp(raw_log_mass);
    prior.log_mass = raw_log_mass.array() - total;
    return prior;
}

}  // namespace

JPrior JPrior::geometric(double p, int j_min, int j_max) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("JPrior::geometric: p must lie in (0,1)");
    if (j_min < 1 || j_max < j_min) throw std::invalid_argument("JPrior::geometric: invalid support");
    std::vector<int> support;
    Eigen::VectorXd lm(j_max - j_min + 1);
    for (int j = j_min; j <= j_max; ++j) {
        support.push_back(j);
        lm[j - j_min] = std::log(p) + (j - 1) * std::log1p(-p);
    }
    return renormalize(std::move(support), std::move(lm));
}

JPrior JPrior::poisson(double lambda, int j_min, int j_max) {
    if (!(lambda > 0.0)) throw std::invalid_argument("JPrior::poisson: lambda must be positive");
    if (j_min < 1 || j_max < j_min) throw std::invalid_argument("JPrior::poisson: invalid support");
    std::vector<int> support;
    Eigen::VectorXd lm(j_max - j_min + 1);
    for (int j = j_min; j <= j_max; ++j) {
        support.push_back(j);
        lm[j - j_min] = j * std::log(lambda) - lambda - std::lgamma(j + 1.0);
    }
    return renormalize(std::move(support), std::move(lm));
}

std::vector<int> classify_by_vote(int n_test, int n_draws, int K,
                                  const std::function<Eigen::VectorXd(int, int)>& prob_fn) {
    if (n_draws < 1) throw std::invalid_argument("classify_by_vote: need at least one draw");
    std::vector<int> predictions(static_cast<std::size_t>(n_test));
    std::vector<int> votes(static_cast<std::size_t>(K));
    for (int i = 0; i < n_test; ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (int g = 0; g < n_draws; ++g) {
            const Eigen::VectorXd p = prob_fn(i, g);
            Eigen::Index arg = 0;
            p.maxCoeff(&arg);  // Eigen returns the first maximal index: smallest wins ties
            ++votes[static_cast<std::size_t>(arg)];
        }
        int best = 0;
        for (int k = 1; k < K; ++k) {
            if (votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(best)]) best = k;
        }
        predictions[static_cast<std::size_t>(i)] = best;
    }
    return predictions;
}

double misclassification_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("misclassification_rate: length mismatch");
    }
    if (predicted.empty()) throw std::invalid_argument("misclassification_rate: empty inputs");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] != truth[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

Eigen::VectorXd posterior_over_J(const Eigen::VectorXd& log_marglik, const JPrior& prior) {
    if (log_marglik.size() != prior.log_mass.size()) {
        throw std::invalid_argument("posterior_over_J: size mismatch with the prior support");
    }
    Eigen::VectorXd lp = log_marglik + prior.log_mass;
    const double total = logsumexp(lp);
    if (!std::isfinite(total)) {
        throw std::runtime_error("posterior_over_J: all marginal likelihoods are zero");
    }
    Eigen::VectorXd p(lp.size());
    for (Eigen::Index i = 0; i < lp.size(); ++i) p[i] = std::exp(lp[i] - total);
    return p;
}

double model_averaged_rate(const Eigen::VectorXd& rates, const Eigen::VectorXd& posterior) {
    if (rates.size() != posterior.size()) throw std::invalid_argument("model_averaged_rate: size mismatch");
    return rates.dot(posterior);
}

std::string ModelAveragingReport::to_text() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-6s %5s  %14s  %8s  %8s\n", "model", "J", "log m(Y|J)", "P(J|Y)", "rate");
    out += buf;
    for (std::size_t s = 0; s < J.size(); ++s) {
        std::snprintf(buf, sizeof(buf), "%-6s %5d  %14.4f  %8.4f  %7.2f%%\n", model.c_str(), J[s],
                      log_marginal[static_cast<Eigen::Index>(s)], posterior_J[static_cast<Eigen::Index>(s)],
                      100.0 * rate[static_cast<Eigen::Index>(s)]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%-6s averaged misclassification rate: %.2f%%\n", model.c_str(),
                  100.0 * averaged_rate);
    out += buf;
    return out;
}

}  // namespace fclass
