#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fclass/grid.hpp"

namespace fclass {

/// One observed curve on a shared grid, with an optional class label.
/// Labels are 0-based internally; files use 1-based labels.
struct FunctionalSample {
    std::vector<double> values;
    std::optional<int> label;
};

/// A fully labeled collection of curves on one grid.
class LabeledFunctionalDataset {
public:
    LabeledFunctionalDataset(TimeGrid grid, std::vector<FunctionalSample> samples, int num_classes);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<FunctionalSample>& samples() const { return samples_; }
    int num_classes() const { return num_classes_; }
    std::size_t size() const { return samples_.size(); }

    const FunctionalSample& operator[](std::size_t i) const { return samples_[i]; }
    int label(std::size_t i) const { return *samples_[i].label; }

    std::vector<int> labels() const;
    std::vector<std::size_t> class_counts() const;

private:
    TimeGrid grid_;
    std::vector<FunctionalSample> samples_;
    int num_classes_;
};

/// Reads the CSV layout written by save_dataset: header `t,<t_0>,...,<t_m>`,
/// rows `label,<x_0>,...,<x_m>` with 1-based labels.
LabeledFunctionalDataset load_dataset(const std::string& path);

void save_dataset(const LabeledFunctionalDataset& dataset, const std::string& path);

/// Per-class test counts are round(n_k * test_fraction); deterministic in `seed`.
std::pair<LabeledFunctionalDataset, LabeledFunctionalDataset>
stratified_split(const LabeledFunctionalDataset& dataset, double test_fraction, std::uint64_t seed);

}  // namespace fclass
