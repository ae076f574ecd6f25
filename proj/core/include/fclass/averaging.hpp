#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fclass {

/// Renormalized prior over the basis dimension J on a finite support.
struct JPrior {
    std::vector<int> support;
    Eigen::VectorXd log_mass;  // renormalized: logsumexp == 0

    static JPrior geometric(double p, int j_min, int j_max);
    static JPrior poisson(double lambda, int j_min, int j_max);
};

/// Vote classification: per retained draw take the argmax category of that
/// draw's probability vector; predict the category with the most votes.
/// Ties break to the smallest category index.
std::vector<int> classify_by_vote(int n_test, int n_draws, int K,
                                  const std::function<Eigen::VectorXd(int, int)>& prob_fn);

double misclassification_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Softmax of (log m(Y|J_s) + log p(J_s)) over the support. -inf entries are
/// allowed; all-(-inf) is an error.
Eigen::VectorXd posterior_over_J(const Eigen::VectorXd& log_marglik, const JPrior& prior);

double model_averaged_rate(const Eigen::VectorXd& rates, const Eigen::VectorXd& posterior);

/// Per-J results of one model's fit/evaluate pass, plus the average.
struct ModelAveragingReport {
    std::string model;
    std::vector<int> J;
    Eigen::VectorXd log_marginal;
    Eigen::VectorXd posterior_J;
    Eigen::VectorXd rate;
    double averaged_rate = 0.0;

    std::string to_text() const;
};

}  // namespace fclass
