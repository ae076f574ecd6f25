#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fclass/rng.hpp"

namespace fclass::discriminant {

/// Normal-inverse-Wishart hyperparameters for one mean/covariance pair.
struct NiwPrior {
    Eigen::VectorXd mu0;
    double kappa0 = 1.0;
    double nu0 = 0.0;
    Eigen::MatrixXd Lambda0;

    /// mu0 = overall score mean, kappa0 = 1, nu0 = m + 2, Lambda0 = I.
    static NiwPrior default_for(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class);
};

/// LDA posterior: shared covariance, one mean per class.
struct LdaPosterior {
    double nu_n = 0.0;
    Eigen::MatrixXd Lambda_n;
    double kappa_n = 0.0;
    std::vector<Eigen::VectorXd> mu_n;  // per class

    struct Draw {
        Eigen::MatrixXd sigma;
        std::vector<Eigen::VectorXd> mu;
    };
    Draw sample(RngStream& rng) const;  // Sigma | Y first, then mu_l | Sigma, Y
};

/// QDA posterior: one normal-inverse-Wishart per class.
struct QdaPosterior {
    std::vector<double> nu_n;
    std::vector<Eigen::MatrixXd> Lambda_n;
    std::vector<double> kappa_n;
    std::vector<Eigen::VectorXd> mu_n;

    struct Draw {
        std::vector<Eigen::MatrixXd> sigma;
        std::vector<Eigen::VectorXd> mu;
    };
    Draw sample(RngStream& rng) const;
};

LdaPosterior fit_lda_posterior(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class,
                               const NiwPrior& prior);

QdaPosterior fit_qda_posterior(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class,
                               const std::vector<NiwPrior>& priors);

/// p_k phi(f; mu_k, Sigma_k) normalized over classes, for one parameter draw.
Eigen::VectorXd predict_prob(const Eigen::VectorXd& score, const std::vector<Eigen::VectorXd>& mu,
                             const std::vector<Eigen::MatrixXd>& sigma, const Eigen::VectorXd& class_prior);

/// Empirical training frequencies, the plug-in class prior.
Eigen::VectorXd empirical_class_prior(const std::vector<std::vector<Eigen::VectorXd>>& scores_by_class);

}  // namespace fclass::discriminant
