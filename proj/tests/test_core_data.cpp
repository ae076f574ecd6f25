#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fclass/dataset.hpp"
#include "fclass/errors.hpp"
#include "fclass/grid.hpp"
#include "fclass/rng.hpp"

using namespace fclass;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("fclass_test_" + name)).string();
}

LabeledFunctionalDataset random_dataset(int n, int K, std::uint64_t seed) {
    const TimeGrid grid = TimeGrid::standard();
    RngStream rng(seed, 0);
    std::vector<FunctionalSample> samples;
    for (int i = 0; i < n; ++i) {
        FunctionalSample s;
        s.values.resize(grid.size());
        for (auto& v : s.values) v = rng.normal();
        s.label = i % K;
        samples.push_back(std::move(s));
    }
    return LabeledFunctionalDataset(grid, std::move(samples), K);
}

}  // namespace

TEST_SUITE("core_data") {

TEST_CASE("grid invariants") {
    const TimeGrid grid = TimeGrid::standard();
    CHECK(grid.size() == 101);
    CHECK(grid[0] == 0.0);
    CHECK(grid[100] == 1.0);
    CHECK(grid.step() == doctest::Approx(0.01).epsilon(1e-12));

    CHECK_THROWS(TimeGrid({0.0, 0.5, 0.7, 1.0}));                 // even count
    CHECK_THROWS(TimeGrid({0.0, 0.7, 0.5, 0.9, 1.0}));            // non-monotone
    CHECK_THROWS(TimeGrid({0.1, 0.5, 1.0}));                      // does not start at 0
    CHECK_THROWS(TimeGrid({0.0, 0.3, 1.0}));                      // non-uniform
    CHECK_NOTHROW(TimeGrid::regular(3));
    CHECK_THROWS(TimeGrid::regular(4));
}

TEST_CASE("dataset validation") {
    const TimeGrid grid = TimeGrid::regular(5);
    std::vector<FunctionalSample> samples(2);
    samples[0].values = {0, 1, 2, 3, 4};
    samples[0].label = 0;
    samples[1].values = {4, 3, 2, 1, 0};
    samples[1].label = 1;
    CHECK_NOTHROW(LabeledFunctionalDataset(grid, samples, 2));

    auto missing = samples;
    missing[1].label.reset();
    CHECK_THROWS(LabeledFunctionalDataset(grid, missing, 2));

    auto bad_range = samples;
    bad_range[1].label = 5;
    CHECK_THROWS(LabeledFunctionalDataset(grid, bad_range, 2));

    // a class with no samples
    CHECK_THROWS(LabeledFunctionalDataset(grid, samples, 3));
}

TEST_CASE("load_dataset parses a small file") {
    const std::string path = temp_path("small.csv");
    {
        std::ofstream out(path);
        out << "t";
        for (int i = 0; i <= 100; ++i) out << "," << (i / 100.0);
        out << "\n";
        for (int r = 0; r < 3; ++r) {
            out << (r % 2 + 1);
            for (int i = 0; i <= 100; ++i) out << "," << (r + i * 0.001);
            out << "\n";
        }
    }
    const auto ds = load_dataset(path);
    CHECK(ds.size() == 3);
    CHECK(ds.num_classes() == 2);
    CHECK(ds.grid().size() == 101);
    CHECK(ds.label(0) == 0);  // 1-based in the file, 0-based internally
    CHECK(ds.label(1) == 1);
    fs::remove(path);
}

TEST_CASE("load_dataset names the ragged row") {
    const std::string path = temp_path("ragged.csv");
    {
        std::ofstream out(path);
        out << "t";
        for (int i = 0; i <= 100; ++i) out << "," << (i / 100.0);
        out << "\n1";
        for (int i = 0; i < 100; ++i) out << ",0.5";  // one value short
        out << "\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("row 1"), ValidationError);
    fs::remove(path);
}

TEST_CASE("load_dataset rejects a non-monotone grid") {
    const std::string path = temp_path("badgrid.csv");
    {
        std::ofstream out(path);
        out << "t,0,0.75,0.5,0.8,1\n1,1,2,3,4,5\n";
    }
    CHECK_THROWS(load_dataset(path));
    fs::remove(path);
}

TEST_CASE("save/load round trip is bit exact") {
    const auto ds = random_dataset(7, 3, 42);
    const std::string path = temp_path("roundtrip.csv");
    save_dataset(ds, path);
    const auto back = load_dataset(path);
    REQUIRE(back.size() == ds.size());
    CHECK(back.num_classes() == ds.num_classes());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.label(i) == ds.label(i));
        for (std::size_t j = 0; j < ds.grid().size(); ++j) {
            CHECK(back[i].values[j] == ds[i].values[j]);  // exact
        }
    }
    fs::remove(path);
}

TEST_CASE("save_dataset error paths") {
    const auto ds = random_dataset(1, 1, 1);
    CHECK_THROWS(save_dataset(ds, "/nonexistent_dir_xyz/out.csv"));

    // n=1 dataset writes exactly two lines
    const std::string path = temp_path("single.csv");
    save_dataset(ds, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 2);
    fs::remove(path);
}

TEST_CASE("stratified_split honors per-class counts") {
    const auto ds = random_dataset(900, 3, 7);  // 300 per class
    const auto [train, test] = stratified_split(ds, 0.2, 11);
    CHECK(train.size() == 720);
    CHECK(test.size() == 180);
    for (auto c : train.class_counts()) CHECK(c == 240);
    for (auto c : test.class_counts()) CHECK(c == 60);
}

TEST_CASE("stratified_split is a partition and deterministic") {
    const auto ds = random_dataset(30, 3, 5);
    const auto [train1, test1] = stratified_split(ds, 0.3, 99);
    const auto [train2, test2] = stratified_split(ds, 0.3, 99);

    // determinism
    REQUIRE(train1.size() == train2.size());
    for (std::size_t i = 0; i < train1.size(); ++i) {
        CHECK(train1[i].values == train2[i].values);
    }

    // union is the original multiset (match by first curve value, all distinct whp)
    std::vector<double> all;
    for (const auto& s : train1.samples()) all.push_back(s.values[0]);
    for (const auto& s : test1.samples()) all.push_back(s.values[0]);
    std::vector<double> orig;
    for (const auto& s : ds.samples()) orig.push_back(s.values[0]);
    std::sort(all.begin(), all.end());
    std::sort(orig.begin(), orig.end());
    CHECK(all == orig);

    // per-class proportions within 1/n_k of the fraction
    const auto counts = test1.class_counts();
    for (std::size_t k = 0; k < counts.size(); ++k) {
        CHECK(std::abs(static_cast<double>(counts[k]) / 10.0 - 0.3) < 1.0 / 10.0);
    }
}

TEST_CASE("stratified_split edge cases") {
    const auto ds = random_dataset(4, 2, 3);  // 2 per class
    const auto [train, test] = stratified_split(ds, 0.5, 1);
    for (auto c : train.class_counts()) CHECK(c == 1);
    for (auto c : test.class_counts()) CHECK(c == 1);

    CHECK_THROWS(stratified_split(ds, 0.0, 1));
    CHECK_THROWS(stratified_split(ds, 1.0, 1));
    CHECK_THROWS(stratified_split(ds, 0.1, 1));  // round(2*0.1)=0 in each class
}

TEST_CASE("rng streams reproduce and substreams differ") {
    RngStream a(123, 5);
    RngStream b(123, 5);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(123, 6);
    bool all_equal = true;
    RngStream a2(123, 5);
    for (int i = 0; i < 16; ++i) all_equal = all_equal && (a2.next_u64() == c.next_u64());
    CHECK_FALSE(all_equal);

    RngStream s1 = RngStream(9, 1).substream(4);
    RngStream s2 = RngStream(9, 1).substream(4);
    CHECK(s1.next_u64() == s2.next_u64());
}

}  // TEST_SUITE
