// Microbenchmarks for the numeric kernels on the hot paths: basis setup,
// design-matrix assembly, truncated-normal draws, the Dunnett quadrature,
// and one Gibbs sweep of each sampler.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fclass/basis.hpp"
#include "fclass/dataset.hpp"
#include "fclass/distributions.hpp"
#include "fclass/grid.hpp"
#include "fclass/logistic.hpp"
#include "fclass/ordered_probit.hpp"
#include "fclass/rng.hpp"
#include "fclass/simulate.hpp"
#include "fclass/unordered_probit.hpp"

using namespace fclass;

namespace {

LabeledFunctionalDataset benchmark_dataset(int n_per_class) {
    simgen::GeneratorSpec spec;
    spec.kind = simgen::Kind::ump;
    spec.n_per_class = n_per_class;
    spec.seed = 1;
    return simgen::generate(spec);
}

}  // namespace

static void BM_MakeBsplineBasis(benchmark::State& state) {
    const TimeGrid grid = TimeGrid::standard();
    const int J = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(make_bspline_basis(J, grid));
    }
}
BENCHMARK(BM_MakeBsplineBasis)->Arg(5)->Arg(15);

static void BM_DesignMatrix(benchmark::State& state) {
    const auto ds = benchmark_dataset(static_cast<int>(state.range(0)));
    const auto basis = make_bspline_basis(10, ds.grid());
    for (auto _ : state) {
        benchmark::DoNotOptimize(design_matrix(ds, basis));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_DesignMatrix)->Arg(20)->Arg(240);

static void BM_TruncnormCentral(benchmark::State& state) {
    RngStream rng(7, 0);
    double acc = 0.0;
    for (auto _ : state) {
        acc += sample_truncnorm(0.3, 1.0, -1.0, 2.0, rng);
    }
    benchmark::DoNotOptimize(acc);
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TruncnormCentral);

static void BM_TruncnormFarTail(benchmark::State& state) {
    RngStream rng(7, 1);
    double acc = 0.0;
    for (auto _ : state) {
        acc += sample_truncnorm(0.0, 1.0, 8.0, 9.0, rng);
    }
    benchmark::DoNotOptimize(acc);
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TruncnormFarTail);

static void BM_DunnettCategoryProb(benchmark::State& state) {
    const auto quad = uprobit::dunnett_rule(32);
    const int K = static_cast<int>(state.range(0));
    RngStream rng(9, 0);
    Eigen::VectorXd eta(K - 1);
    for (int l = 0; l < K - 1; ++l) eta[l] = 2.0 * rng.normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(uprobit::category_prob(eta, quad));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DunnettCategoryProb)->Arg(3)->Arg(5);

static void BM_OrderedProbitSweep(benchmark::State& state) {
    const auto ds = benchmark_dataset(240);
    const auto basis = make_bspline_basis(10, ds.grid());
    const auto dm = design_matrix(ds, basis);
    const auto labels = ds.labels();
    const auto prior = oprobit::OrderedProbitPrior::weakly_informative(10, 3);
    RngStream rng(11, 0);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(10);
    const auto cut = oprobit::gamma_from_alpha(Eigen::VectorXd::Zero(1));
    for (auto _ : state) {
        const Eigen::VectorXd W = oprobit::update_W(theta, cut, labels, dm.Z, rng);
        theta = oprobit::update_theta(W, dm.Z, prior, rng);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_OrderedProbitSweep);

static void BM_UnorderedProbitSweep(benchmark::State& state) {
    const auto ds = benchmark_dataset(240);
    const auto basis = make_bspline_basis(10, ds.grid());
    const auto dm = design_matrix(ds, basis);
    const auto labels = ds.labels();
    const auto prior = uprobit::UnorderedProbitPrior::weakly_informative(10, 3);
    RngStream rng(13, 0);
    Eigen::MatrixXd W(ds.size(), 2);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
        for (int l = 0; l < 2; ++l) W(i, l) = (labels[static_cast<std::size_t>(i)] == l) ? 1.0 : -1.0;
    Eigen::MatrixXd Theta = Eigen::MatrixXd::Zero(10, 2);
    for (auto _ : state) {
        uprobit::update_W(W, Theta, labels, dm.Z, rng);
        Theta = uprobit::update_Theta(W, dm.Z, prior, rng);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_UnorderedProbitSweep);

static void BM_LogisticLikelihood(benchmark::State& state) {
    const auto ds = benchmark_dataset(240);
    const auto basis = make_bspline_basis(10, ds.grid());
    const auto dm = design_matrix(ds, basis);
    const auto labels = ds.labels();
    RngStream rng(17, 0);
    Eigen::MatrixXd Theta(10, 2);
    for (int j = 0; j < 10; ++j)
        for (int k = 0; k < 2; ++k) Theta(j, k) = rng.normal();
    const Eigen::MatrixXd Eta = dm.Z * Theta;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mlogit::log_likelihood(labels, Eta));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_LogisticLikelihood);

BENCHMARK_MAIN();
