#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fclass/averaging.hpp"
#include "fclass/dataset.hpp"
#include "fclass/discriminant.hpp"
#include "fclass/fpca.hpp"
#include "fclass/logistic.hpp"
#include "fclass/ordered_probit.hpp"
#include "fclass/simulate.hpp"
#include "fclass/unordered_probit.hpp"

namespace fclass {

enum class ModelKind { omp, ump, mlo, lda, qda };

ModelKind model_from_string(const std::string& s);
std::string to_string(ModelKind model);
bool is_multinomial(ModelKind model);

/// One declarative run description; every experiment is one config file.
struct RunConfig {
    ModelKind model = ModelKind::omp;
    int j_min = 5;
    int j_max = 15;
    std::string j_prior_kind = "geometric";
    double j_prior_param = 0.5;
    int iterations = 5000;
    int burn_in = 1000;
    double coef_prior_var = 100.0;   // B0 / V0 / per-block Sigma_k scale
    double alpha_prior_var = 10.0;   // A0 scale (ordered probit)
    int quadrature_order = 32;
    int reduced_draws = 0;           // 0: match retained draw count
    int fpca_components = 0;         // 0: variance threshold
    double fpca_threshold = 0.95;
    std::uint64_t seed = 0;
    int threads = 0;                 // 0: hardware concurrency

    JPrior j_prior() const;
    std::vector<int> j_values() const;
};

/// Parse `key = value` lines ('#' comments). Unknown keys are an error.
RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text, const std::string& origin);
void apply_config_override(RunConfig& config, const std::string& key, const std::string& value);
std::string config_to_text(const RunConfig& config);

using MultinomialDraws =
    std::variant<oprobit::OrderedProbitDraws, uprobit::UnorderedProbitDraws, mlogit::LogisticDraws>;

/// Per-J fit artifact of one multinomial model.
struct JFit {
    int J = 0;
    MultinomialDraws draws;
    double log_marginal = 0.0;
    std::string marginal_diagnostic;
};

/// Fit one multinomial model across the configured J range (parallel over J,
/// one derived stream per J).
std::vector<JFit> fit_multinomial(const LabeledFunctionalDataset& train, const RunConfig& config);

/// Vote-classify a test set from one fitted J.
std::vector<int> classify_multinomial(const JFit& fit, const LabeledFunctionalDataset& train_unused_grid,
                                      const LabeledFunctionalDataset& test, const RunConfig& config);

/// Per-J rates, P(J|Y), and the model-averaged rate.
ModelAveragingReport evaluate_multinomial(const std::vector<JFit>& fits, const LabeledFunctionalDataset& test,
                                          const RunConfig& config);

/// Discriminant pipeline: FPCA on the training split only, NIW posteriors,
/// posterior-draw voting on the test split.
struct DiscriminantFit {
    ModelKind model = ModelKind::lda;
    FpcaModel fpca;
    Eigen::VectorXd class_prior;
    std::optional<discriminant::LdaPosterior> lda;
    std::optional<discriminant::QdaPosterior> qda;
};

DiscriminantFit fit_discriminant(const LabeledFunctionalDataset& train, const RunConfig& config);

std::vector<int> classify_discriminant(const DiscriminantFit& fit, const LabeledFunctionalDataset& test,
                                       const RunConfig& config);

/// Run f(0..count-1) on a small worker pool; exceptions propagate.
void parallel_for(int count, int threads, const std::function<void(int)>& f);

}  // namespace fclass
