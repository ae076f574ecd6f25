#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fclass/dataset.hpp"
#include "fclass/grid.hpp"
#include "fclass/rng.hpp"

namespace fclass::simgen {

enum class Kind { omp, ump, mlo, lda, qda };

Kind kind_from_string(const std::string& s);
std::string to_string(Kind kind);

struct GeneratorSpec {
    Kind kind = Kind::omp;
    int n_per_class = 300;
    std::uint64_t seed = 0;
    TimeGrid grid = TimeGrid::standard();
};

/// A coefficient curve evaafter evaluation on the grid.
using Curve = std::vector<double>;

/// Default coefficient curves: fixed linear combinations of the first six
/// cubic B-splines, scaled so the generators' Bayes error is moderate.
Curve default_omp_beta(const TimeGrid& grid);
std::vector<Curve> default_ump_betas(const TimeGrid& grid);
std::vector<Curve> default_mlo_betas(const TimeGrid& grid);  // two curves; beta_3 = 0

/// Curves from GP(sin t, 100 exp(-100 dt^2)); label k when
/// int beta X + eps lands in (gamma_{k-1}, gamma_k]. Classes are balanced by
/// per-class rejection. Fails when a class's acceptance probability is
/// estimated below 1e-4.
LabeledFunctionalDataset generate_omp(int n_total, const Curve& beta, const std::vector<double>& cutpoints,
                                      const TimeGrid& grid, RngStream& rng);

/// Label = argmax_l (int beta_l X + eps_l) over iid standard normal eps.
LabeledFunctionalDataset generate_ump(int n_total, const std::vector<Curve>& betas, const TimeGrid& grid,
                                      RngStream& rng);

/// Label = argmax of the softmax probabilities (deterministic given the curve).
LabeledFunctionalDataset generate_mlo(int n_total, const std::vector<Curve>& betas, const TimeGrid& grid,
                                      RngStream& rng);

/// Three GPs with means sin t + 2 cos t, sin t, sin t - 3 cos t and the
/// shared kernel exp(-30 dt^2).
LabeledFunctionalDataset generate_lda(int n_per_class, const TimeGrid& grid, RngStream& rng);

/// Same means, per-class kernels exp(-2 sin^2(pi dt)), exp(-30 dt^2),
/// exp(-|dt|).
LabeledFunctionalDataset generate_qda(int n_per_class, const TimeGrid& grid, RngStream& rng);

LabeledFunctionalDataset generate(const GeneratorSpec& spec);

}  // namespace fclass::simgen
