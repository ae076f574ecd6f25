#include "fclass/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fclass/basis.hpp"
#include "fclass/errors.hpp"

namespace fclass::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ValidationError(std::string(what) + ": cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ValidationError("write failure on '" + path + "'");
}

json load_json(const std::string& path, const char* what) {
    try {
        return json::parse(read_file(path, what));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string(what) + ": '" + path + "' is not valid JSON (" + e.what() + ")");
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json vector_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

Eigen::VectorXd vector_from_json(const json& a) {
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (rows.empty()) return {};
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
        }
    }
    return m;
}

/// Column-labeled CSV of doubles at full precision.
void write_draws_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::function<double(int, int)>& value, int rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c > 0) out << ',';
        out << columns[c];
    }
    out << '\n';
    for (int r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c > 0) out << ',';
            out << fmt17(value(r, static_cast<int>(c)));
        }
        out << '\n';
    }
    if (!out) throw ValidationError("write failure on '" + path + "'");
}

Eigen::MatrixXd read_draws_csv(const std::string& path, std::vector<std::string>* columns_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cmd_evaluate: cannot open draws file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("cmd_evaluate: '" + path + "' is empty");
    std::vector<std::string> columns;
    {
        std::istringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) columns.push_back(f);
    }
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string f;
        std::size_t c = 0;
        while (std::getline(ss, f, ',')) {
            values.push_back(std::strtod(f.c_str(), nullptr));
            ++c;
        }
        if (c != columns.size()) {
            throw ValidationError("cmd_evaluate: ragged row in '" + path + "'");
        }
        ++rows;
    }
    Eigen::MatrixXd m(rows, columns.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * columns.size() + c];
        }
    }
    if (columns_out) *columns_out = columns;
    return m;
}

std::string draws_path(const std::string& dir, int J) { return dir + "/draws_J" + std::to_string(J) + ".csv"; }

json summary_stats(const Eigen::MatrixXd& draws) {
    // posterior mean, posterior sd, and Monte Carlo standard error (sd/sqrt(G));
    // Table-3-style reports print the posterior sd as the headline spread and
    // both are emitted, labeled.
    const auto G = static_cast<double>(draws.rows());
    json out;
    Eigen::VectorXd mean = draws.colwise().mean();
    Eigen::VectorXd sd(draws.cols());
    for (Eigen::Index c = 0; c < draws.cols(); ++c) {
        const double m = mean[c];
        sd[c] = std::sqrt((draws.col(c).array() - m).square().sum() / std::max(1.0, G - 1.0));
    }
    out["posterior_mean"] = vector_json(mean);
    out["posterior_sd"] = vector_json(sd);
    out["mc_standard_error"] = vector_json(sd / std::sqrt(G));
    return out;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

SimulateSpec parse_simulate_spec_text(const std::string& text, const std::string& origin) {
    SimulateSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_kind = false;
    bool have_out = false;
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
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "kind") {
            spec.kind = simgen::kind_from_string(value);
            have_kind = true;
        } else if (key == "n_per_class") {
            spec.n_per_class = std::stoi(value);
        } else if (key == "seed") {
            spec.seed = std::stoull(value);
        } else if (key == "out") {
            spec.out = value;
            have_out = true;
        } else {
            throw ValidationError(origin + ": unknown simulate key '" + key + "'");
        }
    }
    if (!have_kind) throw ValidationError(origin + ": missing 'kind'");
    if (!have_out) throw ValidationError(origin + ": missing 'out'");
    if (spec.n_per_class < 1) throw ValidationError(origin + ": n_per_class must be positive");
    return spec;
}

SimulateSpec parse_simulate_spec(const std::string& path) {
    return parse_simulate_spec_text(read_file(path, "cmd_simulate"), path);
}

std::string cmd_simulate(const SimulateSpec& spec) {
    simgen::GeneratorSpec gs;
    gs.kind = spec.kind;
    gs.n_per_class = spec.n_per_class;
    gs.seed = spec.seed;
    const LabeledFunctionalDataset dataset = simgen::generate(gs);
    save_dataset(dataset, spec.out);

    std::ostringstream canonical;
    canonical << "kind = " << simgen::to_string(spec.kind) << "\n"
              << "n_per_class = " << spec.n_per_class << "\n"
              << "seed = " << spec.seed << "\n";
    json prov;
    prov["kind"] = simgen::to_string(spec.kind);
    prov["n_per_class"] = spec.n_per_class;
    prov["seed"] = spec.seed;
    prov["n_total"] = dataset.size();
    prov["num_classes"] = dataset.num_classes();
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a_hash(canonical.str()));
    prov["spec_hash"] = hash;
    write_file(spec.out + ".provenance.json", prov.dump(2) + "\n");
    return spec.out;
}

void cmd_fit(const RunConfig& config, const std::string& train_csv, const std::string& out_dir) {
    const LabeledFunctionalDataset train = load_dataset(train_csv);
    fs::create_directories(out_dir);

    json summary;
    summary["model"] = to_string(config.model);
    summary["train"] = train_csv;
    summary["num_classes"] = train.num_classes();
    summary["n_train"] = train.size();
    std::vector<std::string> files;

    if (is_multinomial(config.model)) {
        const std::vector<JFit> fits = fit_multinomial(train, config);
        json per_j = json::array();
        for (const auto& fit : fits) {
            json entry;
            entry["J"] = fit.J;
            entry["log_marginal"] = fit.log_marginal;
            if (!fit.marginal_diagnostic.empty()) entry["marginal_diagnostic"] = fit.marginal_diagnostic;
            const std::string dpath = draws_path(out_dir, fit.J);

            if (const auto* omp = std::get_if<oprobit::OrderedProbitDraws>(&fit.draws)) {
                const int J = fit.J;
                const int A = static_cast<int>(omp->alpha.cols());
                std::vector<std::string> cols;
                for (int j = 1; j <= J; ++j) cols.push_back("theta_" + std::to_string(j));
                for (int a = 1; a <= A; ++a) cols.push_back("alpha_" + std::to_string(a));
                write_draws_csv(dpath, cols,
                                [&](int r, int c) {
                                    return (c < J) ? omp->theta(r, c) : omp->alpha(r, c - J);
                                },
                                static_cast<int>(omp->theta.rows()));
                entry["acceptance_rate"] = omp->acceptance_rate;
                entry["proposal_scale"] = omp->frozen_scale;
                entry["theta"] = summary_stats(omp->theta);
                if (A > 0) {
                    entry["alpha"] = summary_stats(omp->alpha);
                    Eigen::MatrixXd gammas(omp->alpha.rows(), A);
                    for (Eigen::Index g = 0; g < omp->alpha.rows(); ++g) {
                        const auto cp = oprobit::gamma_from_alpha(omp->alpha.row(g).transpose());
                        for (int a = 0; a < A; ++a) gammas(g, a) = cp.gamma[a + 1];
                    }
                    entry["gamma"] = summary_stats(gammas);
                    const std::string tpath = out_dir + "/gamma2_trace_J" + std::to_string(fit.J) + ".csv";
                    write_draws_csv(tpath, {"iteration", "gamma2"},
                                    [&](int r, int c) {
                                        return (c == 0) ? static_cast<double>(r + 1) : omp->gamma2_trace[r];
                                    },
                                    static_cast<int>(omp->gamma2_trace.size()));
                    files.push_back(fs::path(tpath).filename().string());
                }
            } else if (const auto* ump = std::get_if<uprobit::UnorderedProbitDraws>(&fit.draws)) {
                const int J = fit.J;
                const int P = ump->K - 1;
                const int G = static_cast<int>(ump->Theta.size());
                std::vector<std::string> cols;
                for (int p = 1; p <= P; ++p) {
                    for (int j = 1; j <= J; ++j) {
                        cols.push_back("theta_" + std::to_string(j) + "_" + std::to_string(p));
                    }
                }
                write_draws_csv(dpath, cols,
                                [&](int r, int c) {
                                    const int p = c / J;
                                    const int j = c % J;
                                    return ump->Theta[static_cast<std::size_t>(r)](j, p);
                                },
                                G);
                Eigen::MatrixXd flat(G, J * P);
                for (int g = 0; g < G; ++g) {
                    const auto& Th = ump->Theta[static_cast<std::size_t>(g)];
                    for (int p = 0; p < P; ++p)
                        for (int j = 0; j < J; ++j) flat(g, p * J + j) = Th(j, p);
                }
                entry["Theta"] = summary_stats(flat);
            } else {
                const auto& mlo = std::get<mlogit::LogisticDraws>(fit.draws);
                const int J = fit.J;
                const int B = static_cast<int>(mlo.theta.size());
                const int G = static_cast<int>(mlo.theta.front().rows());
                std::vector<std::string> cols;
                for (int b = 1; b <= B; ++b) {
                    for (int j = 1; j <= J; ++j) {
                        cols.push_back("theta_" + std::to_string(j) + "_" + std::to_string(b));
                    }
                }
                write_draws_csv(dpath, cols,
                                [&](int r, int c) {
                                    const int b = c / J;
                                    const int j = c % J;
                                    return mlo.theta[static_cast<std::size_t>(b)](r, j);
                                },
                                G);
                json blocks = json::array();
                for (int b = 0; b < B; ++b) {
                    json blk = summary_stats(mlo.theta[static_cast<std::size_t>(b)]);
                    blk["acceptance_rate"] = mlo.acceptance_rate[static_cast<std::size_t>(b)];
                    blk["proposal_scale"] = mlo.frozen_scale[static_cast<std::size_t>(b)];
                    blocks.push_back(blk);
                }
                entry["theta_blocks"] = blocks;
            }
            files.push_back(fs::path(dpath).filename().string());
            per_j.push_back(entry);
        }
        summary["per_J"] = per_j;
    } else {
        const DiscriminantFit fit = fit_discriminant(train, config);
        json f;
        f["num_components"] = fit.fpca.num_components();
        f["eigenvalues"] = vector_json(fit.fpca.eigenvalues);
        f["mean"] = vector_json(fit.fpca.mean);
        f["components"] = matrix_json(fit.fpca.components);
        summary["fpca"] = f;
        summary["class_prior"] = vector_json(fit.class_prior);
        if (fit.lda) {
            json p;
            p["nu_n"] = fit.lda->nu_n;
            p["kappa_n"] = fit.lda->kappa_n;
            p["Lambda_n"] = matrix_json(fit.lda->Lambda_n);
            json mus = json::array();
            for (const auto& mu : fit.lda->mu_n) mus.push_back(vector_json(mu));
            p["mu_n"] = mus;
            summary["lda_posterior"] = p;
        } else {
            json p = json::array();
            for (std::size_t l = 0; l < fit.qda->mu_n.size(); ++l) {
                json c;
                c["nu_n"] = fit.qda->nu_n[l];
                c["kappa_n"] = fit.qda->kappa_n[l];
                c["Lambda_n"] = matrix_json(fit.qda->Lambda_n[l]);
                c["mu_n"] = vector_json(fit.qda->mu_n[l]);
                p.push_back(c);
            }
            summary["qda_posterior"] = p;
        }
        const std::string cpath = out_dir + "/fpca_components.csv";
        std::vector<std::string> cols = {"t", "mean"};
        for (int j = 1; j <= fit.fpca.num_components(); ++j) cols.push_back("component_" + std::to_string(j));
        write_draws_csv(cpath, cols,
                        [&](int r, int c) {
                            if (c == 0) return fit.fpca.grid[static_cast<std::size_t>(r)];
                            if (c == 1) return fit.fpca.mean[r];
                            return fit.fpca.components(r, c - 2);
                        },
                        static_cast<int>(fit.fpca.grid.size()));
        files.push_back(fs::path(cpath).filename().string());
    }

    write_file(out_dir + "/summary.json", summary.dump(2) + "\n");
    files.push_back("summary.json");

    const std::string config_text = config_to_text(config);
    json manifest;
    manifest["command"] = "fit";
    manifest["train"] = train_csv;
    manifest["config"] = config_text;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a_hash(config_text));
    manifest["config_hash"] = hash;
    manifest["files"] = files;
    write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

ModelAveragingReport cmd_evaluate(const std::string& fit_dir, const std::string& test_csv,
                                  const std::string& dataset_label) {
    const json manifest = load_json(fit_dir + "/manifest.json", "cmd_evaluate");
    const RunConfig config = parse_run_config_text(manifest["config"].get<std::string>(), fit_dir + "/manifest.json");
    const json summary = load_json(fit_dir + "/summary.json", "cmd_evaluate");
    const LabeledFunctionalDataset test = load_dataset(test_csv);
    const int K = summary["num_classes"].get<int>();
    if (K != test.num_classes() && test.num_classes() > K) {
        throw ValidationError("cmd_evaluate: test set has more classes than the fitted model");
    }
    const std::vector<int> truth = test.labels();

    ModelAveragingReport report;
    report.model = to_string(config.model);

    if (is_multinomial(config.model)) {
        std::vector<JFit> fits;
        for (const auto& entry : summary["per_J"]) {
            const int J = entry["J"].get<int>();
            const std::string dpath = draws_path(fit_dir, J);
            if (!fs::exists(dpath)) {
                throw ValidationError("cmd_evaluate: missing draws artifact for J = " + std::to_string(J) + " ('" +
                                      dpath + "')");
            }
            const Eigen::MatrixXd m = read_draws_csv(dpath);
            JFit fit;
            fit.J = J;
            fit.log_marginal = entry["log_marginal"].get<double>();
            if (config.model == ModelKind::omp) {
                oprobit::OrderedProbitDraws d;
                d.K = K;
                d.theta = m.leftCols(J);
                d.alpha = m.rightCols(m.cols() - J);
                fit.draws = std::move(d);
            } else if (config.model == ModelKind::ump) {
                uprobit::UnorderedProbitDraws d;
                d.K = K;
                const int P = K - 1;
                const int G = static_cast<int>(m.rows());
                d.Theta.reserve(static_cast<std::size_t>(G));
                for (int g = 0; g < G; ++g) {
                    Eigen::MatrixXd Th(J, P);
                    for (int p = 0; p < P; ++p)
                        for (int j = 0; j < J; ++j) Th(j, p) = m(g, p * J + j);
                    d.Theta.push_back(std::move(Th));
                }
                fit.draws = std::move(d);
            } else {
                mlogit::LogisticDraws d;
                d.K = K;
                const int B = K - 1;
                for (int b = 0; b < B; ++b) d.theta.push_back(m.middleCols(b * J, J));
                fit.draws = std::move(d);
            }
            fits.push_back(std::move(fit));
        }
        report = evaluate_multinomial(fits, test, config);
    } else {
        DiscriminantFit fit;
        fit.model = config.model;
        fit.fpca.grid = test.grid();
        fit.fpca.mean = vector_from_json(summary["fpca"]["mean"]);
        fit.fpca.components = matrix_from_json(summary["fpca"]["components"]);
        fit.fpca.eigenvalues = vector_from_json(summary["fpca"]["eigenvalues"]);
        fit.class_prior = vector_from_json(summary["class_prior"]);
        if (config.model == ModelKind::lda) {
            discriminant::LdaPosterior p;
            p.nu_n = summary["lda_posterior"]["nu_n"].get<double>();
            p.kappa_n = summary["lda_posterior"]["kappa_n"].get<double>();
            p.Lambda_n = matrix_from_json(summary["lda_posterior"]["Lambda_n"]);
            for (const auto& mu : summary["lda_posterior"]["mu_n"]) p.mu_n.push_back(vector_from_json(mu));
            fit.lda = std::move(p);
        } else {
            discriminant::QdaPosterior p;
            for (const auto& c : summary["qda_posterior"]) {
                p.nu_n.push_back(c["nu_n"].get<double>());
                p.kappa_n.push_back(c["kappa_n"].get<double>());
                p.Lambda_n.push_back(matrix_from_json(c["Lambda_n"]));
                p.mu_n.push_back(vector_from_json(c["mu_n"]));
            }
            fit.qda = std::move(p);
        }
        const std::vector<int> pred = classify_discriminant(fit, test, config);
        report.model = to_string(config.model);
        report.J = {0};
        report.log_marginal = Eigen::VectorXd::Zero(1);
        report.posterior_J = Eigen::VectorXd::Ones(1);
        report.rate = Eigen::VectorXd::Constant(1, misclassification_rate(pred, truth));
        report.averaged_rate = report.rate[0];
    }

    json out;
    out["model"] = report.model;
    out["test"] = test_csv;
    out["dataset_label"] = dataset_label.empty() ? fs::path(test_csv).stem().string() : dataset_label;
    json per_j = json::array();
    for (std::size_t s = 0; s < report.J.size(); ++s) {
        json e;
        e["J"] = report.J[s];
        e["log_marginal"] = report.log_marginal[static_cast<Eigen::Index>(s)];
        e["posterior_J"] = report.posterior_J[static_cast<Eigen::Index>(s)];
        e["rate"] = report.rate[static_cast<Eigen::Index>(s)];
        per_j.push_back(e);
    }
    out["per_J"] = per_j;
    out["averaged_rate"] = report.averaged_rate;
    write_file(fit_dir + "/report.json", out.dump(2) + "\n");
    write_file(fit_dir + "/report.txt", report.to_text());
    return report;
}

std::string cmd_report(const std::vector<std::string>& report_paths) {
    // dataset label -> model -> averaged rate
    std::map<std::string, std::map<std::string, double>> grid;
    std::vector<std::string> model_order = {"omp", "ump", "mlo", "lda", "qda"};
    for (const auto& path : report_paths) {
        const json r = load_json(path, "cmd_report");
        grid[r["dataset_label"].get<std::string>()][r["model"].get<std::string>()] =
            r["averaged_rate"].get<double>();
    }
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-16s", "dataset");
    out << buf;
    for (const auto& m : model_order) {
        std::snprintf(buf, sizeof(buf), " %8s", m.c_str());
        out << buf;
    }
    out << '\n';
    for (const auto& [label, rates] : grid) {
        std::snprintf(buf, sizeof(buf), "%-16s", label.c_str());
        out << buf;
        for (const auto& m : model_order) {
            auto it = rates.find(m);
            if (it == rates.end()) {
                std::snprintf(buf, sizeof(buf), " %8s", "-");
            } else {
                std::snprintf(buf, sizeof(buf), " %7.2f%%", 100.0 * it->second);
            }
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fclass::commands
