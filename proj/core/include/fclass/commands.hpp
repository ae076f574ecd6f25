#pragma once

#include <string>
#include <vector>

#include "fclass/runner.hpp"

namespace fclass::commands {

/// Simulation spec: `key = value` file with kind, n_per_class, seed, out.
struct SimulateSpec {
    simgen::Kind kind = simgen::Kind::omp;
    int n_per_class = 300;
    std::uint64_t seed = 0;
    std::string out;
};

SimulateSpec parse_simulate_spec(const std::string& path);
SimulateSpec parse_simulate_spec_text(const std::string& text, const std::string& origin);

/// Writes the dataset CSV plus `<out>.provenance.json` (seed, spec hash).
std::string cmd_simulate(const SimulateSpec& spec);

/// Fits the configured model on the training CSV; writes one draws CSV per J
/// (plus a gamma_2 trace for the ordered probit), summary.json, manifest.json.
void cmd_fit(const RunConfig& config, const std::string& train_csv, const std::string& out_dir);

/// Re-reads fit artifacts, vote-classifies the test CSV, and writes
/// report.json and report.txt into the fit directory.
ModelAveragingReport cmd_evaluate(const std::string& fit_dir, const std::string& test_csv,
                                  const std::string& dataset_label = "");

/// Aggregates evaluation reports into a dataset-by-model rate table.
std::string cmd_report(const std::vector<std::string>& report_paths);

/// 64-bit FNV-1a, used to fingerprint configs in manifests.
std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace fclass::commands
