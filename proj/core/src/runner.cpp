#include "fclass/runner.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "fclass/basis.hpp"
#include "fclass/errors.hpp"

namespace fclass {

namespace {

/// Streams per J are spaced out so the chain, the reduced run, and any
/// classifier draws never collide.
constexpr std::uint64_t kStreamsPerJ = 8;

std::uint64_t chain_stream(int J) { return static_cast<std::uint64_t>(J) * kStreamsPerJ; }
std::uint64_t chib_stream(int J) { return static_cast<std::uint64_t>(J) * kStreamsPerJ + 1; }

}  // namespace

ModelKind model_from_string(const std::string& s) {
    if (s == "omp") return ModelKind::omp;
    if (s == "ump") return ModelKind::ump;
    if (s == "mlo") return ModelKind::mlo;
    if (s == "lda") return ModelKind::lda;
    if (s == "qda") return ModelKind::qda;
    throw ValidationError("unknown model '" + s + "' (expected omp|ump|mlo|lda|qda)");
}

std::string to_string(ModelKind model) {
    switch (model) {
        case ModelKind::omp: return "omp";
        case ModelKind::ump: return "ump";
        case ModelKind::mlo: return "mlo";
        case ModelKind::lda: return "lda";
        case ModelKind::qda: return "qda";
    }
    throw std::logic_error("invalid ModelKind");
}

bool is_multinomial(ModelKind model) {
    return model == ModelKind::omp || model == ModelKind::ump || model == ModelKind::mlo;
}

JPrior RunConfig::j_prior() const {
    if (j_prior_kind == "geometric") return JPrior::geometric(j_prior_param, j_min, j_max);
    if (j_prior_kind == "poisson") return JPrior::poisson(j_prior_param, j_min, j_max);
    throw ValidationError("unknown j_prior '" + j_prior_kind + "' (expected geometric|poisson)");
}

std::vector<int> RunConfig::j_values() const {
    std::vector<int> out;
    for (int j = j_min; j <= j_max; ++j) out.push_back(j);
    return out;
}

void apply_config_override(RunConfig& config, const std::string& key, const std::string& value) {
    auto to_int = [&](const std::string& v) {
        try {
            std::size_t pos = 0;
            const int x = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ValidationError("config: '" + key + "' expects an integer, got '" + v + "'");
        }
    };
    auto to_double = [&](const std::string& v) {
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ValidationError("config: '" + key + "' expects a number, got '" + v + "'");
        }
    };
    if (key == "model") config.model = model_from_string(value);
    else if (key == "j_min") config.j_min = to_int(value);
    else if (key == "j_max") config.j_max = to_int(value);
    else if (key == "j_prior") config.j_prior_kind = value;
    else if (key == "j_prior_param") config.j_prior_param = to_double(value);
    else if (key == "iterations") config.iterations = to_int(value);
    else if (key == "burn_in") config.burn_in = to_int(value);
    else if (key == "coef_prior_var") config.coef_prior_var = to_double(value);
    else if (key == "alpha_prior_var") config.alpha_prior_var = to_double(value);
    else if (key == "quadrature_order") config.quadrature_order = to_int(value);
    else if (key == "reduced_draws") config.reduced_draws = to_int(value);
    else if (key == "fpca_components") config.fpca_components = to_int(value);
    else if (key == "fpca_threshold") config.fpca_threshold = to_double(value);
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "threads") config.threads = to_int(value);
    else throw ValidationError("config: unknown key '" + key + "'");
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        apply_config_override(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    if (config.burn_in >= config.iterations) {
        throw ValidationError(origin + ": burn_in must be smaller than iterations");
    }
    if (config.j_min < 4 || config.j_max < config.j_min) {
        throw ValidationError(origin + ": need 4 <= j_min <= j_max (cubic B-splines require J >= 4)");
    }
    return config;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config_text(ss.str(), path);
}

std::string config_to_text(const RunConfig& config) {
    std::ostringstream out;
    out << "model = " << to_string(config.model) << "\n";
    out << "j_min = " << config.j_min << "\n";
    out << "j_max = " << config.j_max << "\n";
    out << "j_prior = " << config.j_prior_kind << "\n";
    out << "j_prior_param = " << config.j_prior_param << "\n";
    out << "iterations = " << config.iterations << "\n";
    out << "burn_in = " << config.burn_in << "\n";
    out << "coef_prior_var = " << config.coef_prior_var << "\n";
    out << "alpha_prior_var = " << config.alpha_prior_var << "\n";
    out << "quadrature_order = " << config.quadrature_order << "\n";
    out << "reduced_draws = " << config.reduced_draws << "\n";
    out << "fpca_components = " << config.fpca_components << "\n";
    out << "fpca_threshold = " << config.fpca_threshold << "\n";
    out << "seed = " << config.seed << "\n";
    out << "threads = " << config.threads << "\n";
    return out.str();
}

void parallel_for(int count, int threads, const std::function<void(int)>& f) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::vector<JFit> fit_multinomial(const LabeledFunctionalDataset& train, const RunConfig& config) {
    if (!is_multinomial(config.model)) {
        throw ValidationError("fit_multinomial: model must be omp, ump, or mlo");
    }
    const int K = train.num_classes();
    const std::vector<int> js = config.j_values();
    const std::vector<int> labels = train.labels();
    std::vector<JFit> fits(js.size());

    parallel_for(static_cast<int>(js.size()), config.threads, [&](int idx) {
        const int J = js[static_cast<std::size_t>(idx)];
        const BasisSystem basis = make_bspline_basis(J, train.grid());
        const DesignMatrix dm = design_matrix(train, basis);
        JFit fit;
        fit.J = J;
        if (config.model == ModelKind::omp) {
            auto prior = oprobit::OrderedProbitPrior::weakly_informative(J, K);
            prior.B0 = config.coef_prior_var * Eigen::MatrixXd::Identity(J, J);
            prior.B0_inv = (1.0 / config.coef_prior_var) * Eigen::MatrixXd::Identity(J, J);
            prior.A0 = config.alpha_prior_var *
                       Eigen::MatrixXd::Identity(std::max(0, K - 2), std::max(0, K - 2));
            oprobit::McmcConfig mc;
            mc.iterations = config.iterations;
            mc.burn_in = config.burn_in;
            mc.seed = config.seed;
            mc.stream = chain_stream(J);
            auto draws = oprobit::run_mcmc(labels, K, dm.Z, prior, mc);
            oprobit::ChibConfig cc;
            cc.reduced_draws = config.reduced_draws;
            cc.seed = config.seed;
            cc.stream = chib_stream(J);
            const auto chib = oprobit::log_marginal_likelihood(draws, labels, dm.Z, prior, cc);
            fit.log_marginal = chib.log_marginal;
            fit.marginal_diagnostic = chib.diagnostic;
            fit.draws = std::move(draws);
        } else if (config.model == ModelKind::ump) {
            auto prior = uprobit::UnorderedProbitPrior::weakly_informative(J, K);
            prior.V0 = config.coef_prior_var * Eigen::MatrixXd::Identity(J, J);
            prior.V0_inv = (1.0 / config.coef_prior_var) * Eigen::MatrixXd::Identity(J, J);
            uprobit::McmcConfig mc;
            mc.iterations = config.iterations;
            mc.burn_in = config.burn_in;
            mc.seed = config.seed;
            mc.stream = chain_stream(J);
            mc.quadrature_order = config.quadrature_order;
            auto draws = uprobit::run_mcmc(labels, K, dm.Z, prior, mc);
            const auto quad = uprobit::dunnett_rule(config.quadrature_order);
            const auto chib = uprobit::log_marginal_likelihood(draws, labels, dm.Z, prior, quad);
            fit.log_marginal = chib.log_marginal;
            fit.marginal_diagnostic = chib.diagnostic;
            fit.draws = std::move(draws);
        } else {
            auto prior = mlogit::LogisticPrior::weakly_informative(J, K);
            for (auto& s : prior.sigma) s = config.coef_prior_var * Eigen::MatrixXd::Identity(J, J);
            mlogit::McmcConfig mc;
            mc.iterations = config.iterations;
            mc.burn_in = config.burn_in;
            mc.seed = config.seed;
            mc.stream = chain_stream(J);
            auto draws = mlogit::run_mcmc(labels, K, dm.Z, prior, mc);
            mlogit::ChibConfig cc;
            cc.reduced_draws = config.reduced_draws;
            cc.seed = config.seed;
            cc.stream = chib_stream(J);
            const auto chib = mlogit::log_marginal_likelihood(draws, labels, dm.Z, prior, cc);
            fit.log_marginal = chib.log_marginal;
            fit.marginal_diagnostic = chib.diagnostic;
            fit.draws = std::move(draws);
        }
        fits[static_cast<std::size_t>(idx)] = std::move(fit);
    });
    return fits;
}

std::vector<int> classify_multinomial(const JFit& fit, const LabeledFunctionalDataset&,
                                      const LabeledFunctionalDataset& test, const RunConfig& config) {
    const BasisSystem basis = make_bspline_basis(fit.J, test.grid());
    const DesignMatrix dm = design_matrix(test, basis);
    const auto n_test = static_cast<int>(test.size());

    if (const auto* omp = std::get_if<oprobit::OrderedProbitDraws>(&fit.draws)) {
        const int G = static_cast<int>(omp->theta.rows());
        const Eigen::MatrixXd Eta = dm.Z * omp->theta.transpose();  // n_test x G
        std::vector<oprobit::OrderedCutpoints> cuts(static_cast<std::size_t>(G));
        for (int g = 0; g < G; ++g) {
            cuts[static_cast<std::size_t>(g)] = oprobit::gamma_from_alpha(omp->alpha.row(g).transpose());
        }
        return classify_by_vote(n_test, G, omp->K, [&](int i, int g) {
            return oprobit::category_prob(Eta(i, g), cuts[static_cast<std::size_t>(g)]);
        });
    }
    if (const auto* ump = std::get_if<uprobit::UnorderedProbitDraws>(&fit.draws)) {
        const int G = static_cast<int>(ump->Theta.size());
        const auto quad = uprobit::dunnett_rule(config.quadrature_order);
        std::vector<Eigen::MatrixXd> Etas(static_cast<std::size_t>(G));
        for (int g = 0; g < G; ++g) Etas[static_cast<std::size_t>(g)] = dm.Z * ump->Theta[static_cast<std::size_t>(g)];
        return classify_by_vote(n_test, G, ump->K, [&](int i, int g) {
            return uprobit::category_prob(Etas[static_cast<std::size_t>(g)].row(i).transpose(), quad);
        });
    }
    const auto& mlo = std::get<mlogit::LogisticDraws>(fit.draws);
    const int B = static_cast<int>(mlo.theta.size());
    const int G = static_cast<int>(mlo.theta.front().rows());
    std::vector<Eigen::MatrixXd> Etas(static_cast<std::size_t>(B));
    for (int k = 0; k < B; ++k) {
        Etas[static_cast<std::size_t>(k)] = dm.Z * mlo.theta[static_cast<std::size_t>(k)].transpose();  // n x G
    }
    return classify_by_vote(n_test, G, mlo.K, [&](int i, int g) {
        Eigen::VectorXd eta(B);
        for (int k = 0; k < B; ++k) eta[k] = Etas[static_cast<std::size_t>(k)](i, g);
        return mlogit::category_prob(eta);
    });
}

ModelAveragingReport evaluate_multinomial(const std::vector<JFit>& fits, const LabeledFunctionalDataset& test,
                                          const RunConfig& config) {
    ModelAveragingReport report;
    report.model = to_string(config.model);
    const auto S = static_cast<Eigen::Index>(fits.size());
    report.log_marginal.resize(S);
    report.rate.resize(S);
    const std::vector<int> truth = test.labels();

    std::vector<std::vector<int>> predictions(fits.size());
    parallel_for(static_cast<int>(fits.size()), config.threads, [&](int s) {
        predictions[static_cast<std::size_t>(s)] =
            classify_multinomial(fits[static_cast<std::size_t>(s)], test, test, config);
    });
    for (std::size_t s = 0; s < fits.size(); ++s) {
        report.J.push_back(fits[s].J);
        report.log_marginal[static_cast<Eigen::Index>(s)] = fits[s].log_marginal;
        report.rate[static_cast<Eigen::Index>(s)] = misclassification_rate(predictions[s], truth);
    }
    report.posterior_J = posterior_over_J(report.log_marginal, config.j_prior());
    report.averaged_rate = model_averaged_rate(report.rate, report.posterior_J);
    return report;
}

DiscriminantFit fit_discriminant(const LabeledFunctionalDataset& train, const RunConfig& config) {
    if (is_multinomial(config.model)) {
        throw ValidationError("fit_discriminant: model must be lda or qda");
    }
    DiscriminantFit fit;
    fit.model = config.model;
    FpcaOptions opts;
    opts.num_components = config.fpca_components;
    opts.variance_threshold = config.fpca_threshold;
    fit.fpca = fit_fpca(train, opts);
    if (fit.fpca.num_components() < 1) {
        throw NumericalError("fit_discriminant: FPCA found no nonzero components");
    }

    const int K = train.num_classes();
    std::vector<std::vector<Eigen::VectorXd>> scores(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < train.size(); ++i) {
        scores[static_cast<std::size_t>(train.label(i))].push_back(project_scores(train[i].values, fit.fpca));
    }
    fit.class_prior = discriminant::empirical_class_prior(scores);
    const auto prior = discriminant::NiwPrior::default_for(scores);
    if (config.model == ModelKind::lda) {
        fit.lda = discriminant::fit_lda_posterior(scores, prior);
    } else {
        fit.qda = discriminant::fit_qda_posterior(scores, std::vector<discriminant::NiwPrior>(
                                                              static_cast<std::size_t>(K), prior));
    }
    return fit;
}

std::vector<int> classify_discriminant(const DiscriminantFit& fit, const LabeledFunctionalDataset& test,
                                       const RunConfig& config) {
    const int n_draws = config.iterations - config.burn_in;
    const auto n_test = static_cast<int>(test.size());
    const int K = static_cast<int>(fit.class_prior.size());

    std::vector<Eigen::VectorXd> scores;
    scores.reserve(test.size());
    for (const auto& s : test.samples()) scores.push_back(project_scores(s.values, fit.fpca));

    // Draw once, vote across all test points per draw.
    RngStream rng(config.seed, /*stream=*/3);
    std::vector<std::vector<int>> votes(static_cast<std::size_t>(n_test),
                                        std::vector<int>(static_cast<std::size_t>(K), 0));
    for (int g = 0; g < n_draws; ++g) {
        std::vector<Eigen::VectorXd> mu;
        std::vector<Eigen::MatrixXd> sigma;
        if (fit.lda) {
            auto draw = fit.lda->sample(rng);
            mu = std::move(draw.mu);
            sigma.push_back(std::move(draw.sigma));
        } else {
            auto draw = fit.qda->sample(rng);
            mu = std::move(draw.mu);
            sigma = std::move(draw.sigma);
        }
        for (int i = 0; i < n_test; ++i) {
            const Eigen::VectorXd p =
                discriminant::predict_prob(scores[static_cast<std::size_t>(i)], mu, sigma, fit.class_prior);
            Eigen::Index arg = 0;
            p.maxCoeff(&arg);
            ++votes[static_cast<std::size_t>(i)][static_cast<std::size_t>(arg)];
        }
    }
    std::vector<int> predictions(static_cast<std::size_t>(n_test));
    for (int i = 0; i < n_test; ++i) {
        const auto& v = votes[static_cast<std::size_t>(i)];
        int best = 0;
        for (int k = 1; k < K; ++k) {
            if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)]) best = k;
        }
        predictions[static_cast<std::size_t>(i)] = best;
    }
    return predictions;
}

}  // namespace fclass
