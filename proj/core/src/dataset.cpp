#include "fclass/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fclass/errors.hpp"
#include "fclass/rng.hpp"

namespace fclass {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
        throw ValidationError("load_dataset: cannot parse value '" + s + "' at row " + std::to_string(row) +
                                 ", column " + std::to_string(col));
    }
    return v;
}

void write_double(std::FILE* f, double v) {
    // max_digits10 formatting so a save/load round trip is bit exact
    std::fprintf(f, "%.17g", v);
}

}  // namespace

LabeledFunctionalDataset::LabeledFunctionalDataset(TimeGrid grid, std::vector<FunctionalSample> samples,
                                                   int num_classes)
    : grid_(std::move(grid)), samples_(std::move(samples)), num_classes_(num_classes) {
    if (num_classes_ < 1) throw std::invalid_argument("LabeledFunctionalDataset: need at least one class");
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (s.values.size() != grid_.size()) {
            throw std::invalid_argument("LabeledFunctionalDataset: sample " + std::to_string(i) + " has " +
                                        std::to_string(s.values.size()) + " values, grid has " +
                                        std::to_string(grid_.size()));
        }
        if (!s.label.has_value()) {
            throw std::invalid_argument("LabeledFunctionalDataset: sample " + std::to_string(i) + " is unlabeled");
        }
        if (*s.label < 0 || *s.label >= num_classes_) {
            throw std::invalid_argument("LabeledFunctionalDataset: sample " + std::to_string(i) +
                                        " has label out of range");
        }
        ++counts[static_cast<std::size_t>(*s.label)];
    }
    for (int k = 0; k < num_classes_; ++k) {
        if (counts[static_cast<std::size_t>(k)] == 0) {
            throw std::invalid_argument("LabeledFunctionalDataset: class " + std::to_string(k + 1) +
                                        " has no samples");
        }
    }
}

std::vector<int> LabeledFunctionalDataset::labels() const {
    std::vector<int> out(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) out[i] = *samples_[i].label;
    return out;
}

std::vector<std::size_t> LabeledFunctionalDataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
    for (const auto& s : samples_) ++counts[static_cast<std::size_t>(*s.label)];
    return counts;
}

LabeledFunctionalDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("load_dataset: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("load_dataset: '" + path + "' is empty");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t") {
        throw ValidationError("load_dataset: header must be 't,<t_0>,...,<t_m>' in '" + path + "'");
    }
    std::vector<double> grid_points;
    grid_points.reserve(header.size() - 1);
    for (std::size_t j = 1; j < header.size(); ++j) grid_points.push_back(parse_double(header[j], 0, j));
    TimeGrid grid(std::move(grid_points));

    const std::size_t m = grid.size();
    std::vector<FunctionalSample> samples;
    int max_label = 0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != m + 1) {
            throw ValidationError("load_dataset: row " + std::to_string(row) + " has " +
                                     std::to_string(fields.size() - 1) + " values, expected " + std::to_string(m));
        }
        const double raw_label = parse_double(fields[0], row, 0);
        const int file_label = static_cast<int>(raw_label);
        if (static_cast<double>(file_label) != raw_label || file_label < 1) {
            throw ValidationError("load_dataset: row " + std::to_string(row) +
                                     " has invalid label '" + fields[0] + "' (labels are 1-based integers)");
        }
        FunctionalSample s;
        s.values.resize(m);
        for (std::size_t j = 0; j < m; ++j) s.values[j] = parse_double(fields[j + 1], row, j + 1);
        s.label = file_label - 1;  // 0-based internally
        max_label = std::max(max_label, file_label);
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw ValidationError("load_dataset: no data rows in '" + path + "'");
    return LabeledFunctionalDataset(std::move(grid), std::move(samples), max_label);
}

void save_dataset(const LabeledFunctionalDataset& dataset, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ValidationError("save_dataset: cannot open '" + path + "' for writing");
    std::fputs("t", f);
    for (double t : dataset.grid().points()) {
        std::fputc(',', f);
        write_double(f, t);
    }
    std::fputc('\n', f);
    for (const auto& s : dataset.samples()) {
        std::fprintf(f, "%d", *s.label + 1);  // 1-based in files
        for (double v : s.values) {
            std::fputc(',', f);
            write_double(f, v);
        }
        std::fputc('\n', f);
    }
    if (std::fclose(f) != 0) throw ValidationError("save_dataset: write failure on '" + path + "'");
}

std::pair<LabeledFunctionalDataset, LabeledFunctionalDataset>
stratified_split(const LabeledFunctionalDataset& dataset, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("stratified_split: test_fraction must lie in (0,1)");
    }
    const int K = dataset.num_classes();
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.label(i))].push_back(i);
    }

    RngStream rng(seed, /*stream=*/0);
    std::vector<std::size_t> test_idx;
    std::vector<std::size_t> train_idx;
    for (int k = 0; k < K; ++k) {
        auto& idx = by_class[static_cast<std::size_t>(k)];
        const std::size_t n_k = idx.size();
        const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n_k) * test_fraction));
        if (n_test == 0 || n_test == n_k) {
            throw std::invalid_argument("stratified_split: class " + std::to_string(k + 1) + " with " +
                                        std::to_string(n_k) + " samples cannot place >=1 sample in each split");
        }
        // Fisher-Yates with the stream's own integers, so the partition is a
        // pure function of (dataset order, seed).
        for (std::size_t i = n_k - 1; i > 0; --i) {
            const std::size_t j = rng.uniform_below(i + 1);
            std::swap(idx[i], idx[j]);
        }
        test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    auto take = [&](const std::vector<std::size_t>& which) {
        std::vector<FunctionalSample> out;
        out.reserve(which.size());
        for (std::size_t i : which) out.push_back(dataset[i]);
        return LabeledFunctionalDataset(dataset.grid(), std::move(out), K);
    };
    return {take(train_idx), take(test_idx)};
}

}  // namespace fclass
