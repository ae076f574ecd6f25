#include "fclass/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fclass/basis.hpp"
#include "fclass/errors.hpp"
#include "fclass/distributions.hpp"

namespace fclass::simgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Estimated-acceptance floor for the class-starvation guard.
constexpr double kMinAcceptance = 1e-4;
constexpr int kRateCheckInterval = 100000;

Curve bspline_combination(const TimeGrid& grid, const Eigen::VectorXd& coefs) {
    const BasisSystem basis = make_bspline_basis(static_cast<int>(coefs.size()), grid, 4);
    Eigen::VectorXd values = basis.B.transpose() * coefs;
    return Curve(values.data(), values.data() + values.size());
}

double inner_product(const Curve& beta, const std::vector<double>& x, const Eigen::VectorXd& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) s += w[static_cast<Eigen::Index>(i)] * beta[i] * x[i];
    return s;
}

/// Shared GP for the three multinomial generators (§ mean sin t, kernel
/// 100 exp(-100 dt^2)).
GpSampler multinomial_gp(const TimeGrid& grid) {
    return GpSampler([](double t) { return std::sin(t); },
                     [](double s, double t) { return 100.0 * std::exp(-100.0 * (s - t) * (s - t)); }, grid);
}

/// Draw-label-reject loop shared by the three multinomial generators.
template <typename LabelFn>
LabeledFunctionalDataset rejection_balanced(int n_total, int K, const TimeGrid& grid, const GpSampler& gp,
                                            RngStream& rng, LabelFn&& label_of) {
    if (n_total < K || n_total % K != 0) {
        throw std::invalid_argument("simgen: n_total must be a positive multiple of the class count");
    }
    const int per_class = n_total / K;
    std::vector<std::vector<FunctionalSample>> buckets(static_cast<std::size_t>(K));
    std::vector<long> accepted_counts(static_cast<std::size_t>(K), 0);
    long attempts = 0;
    int filled = 0;
    while (filled < K) {
        ++attempts;
        RngStream sub = rng.substream(static_cast<std::uint64_t>(attempts));
        std::vector<double> x = gp.draw(sub);
        const int label = label_of(x, sub);
        auto& bucket = buckets[static_cast<std::size_t>(label)];
        ++accepted_counts[static_cast<std::size_t>(label)];
        if (static_cast<int>(bucket.size()) < per_class) {
            FunctionalSample s;
            s.values = std::move(x);
            s.label = label;
            bucket.push_back(std::move(s));
            if (static_cast<int>(bucket.size()) == per_class) ++filled;
        }
        if (attempts % kRateCheckInterval == 0) {
            for (int k = 0; k < K; ++k) {
                if (static_cast<int>(buckets[static_cast<std::size_t>(k)].size()) < per_class) {
                    const double rate =
                        static_cast<double>(accepted_counts[static_cast<std::size_t>(k)]) / attempts;
                    if (rate < kMinAcceptance) {
                        throw std::runtime_error("simgen: class " + std::to_string(k + 1) +
                                                 " starvation (estimated acceptance probability " +
                                                 std::to_string(rate) + " after " + std::to_string(attempts) +
                                                 " attempts)");
                    }
                }
            }
        }
    }
    std::vector<FunctionalSample> samples;
    samples.reserve(static_cast<std::size_t>(n_total));
    for (auto& bucket : buckets) {
        for (auto& s : bucket) samples.push_back(std::move(s));
    }
    return LabeledFunctionalDataset(grid, std::move(samples), K);
}

LabeledFunctionalDataset generate_gaussian_classes(int n_per_class, const TimeGrid& grid,
                                                   const std::vector<MeanFn>& means,
                                                   const std::vector<KernelFn>& kernels, RngStream& rng) {
    const int K = static_cast<int>(means.size());
    std::vector<FunctionalSample> samples;
    samples.reserve(static_cast<std::size_t>(K * n_per_class));
    for (int k = 0; k < K; ++k) {
        GpSampler gp(means[static_cast<std::size_t>(k)], kernels[static_cast<std::size_t>(k)], grid);
        RngStream cls = rng.substream(static_cast<std::uint64_t>(k));
        for (int i = 0; i < n_per_class; ++i) {
            RngStream sub = cls.substream(static_cast<std::uint64_t>(i));
            FunctionalSample s;
            s.values = gp.draw(sub);
            s.label = k;
            samples.push_back(std::move(s));
        }
    }
    return LabeledFunctionalDataset(grid, std::move(samples), K);
}

}  // namespace

Kind kind_from_string(const std::string& s) {
    if (s == "omp") return Kind::omp;
    if (s == "ump") return Kind::ump;
    if (s == "mlo") return Kind::mlo;
    if (s == "lda") return Kind::lda;
    if (s == "qda") return Kind::qda;
    throw ValidationError("simgen: unknown generator kind '" + s + "'");
}

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::omp: return "omp";
        case Kind::ump: return "ump";
        case Kind::mlo: return "mlo";
        case Kind::lda: return "lda";
        case Kind::qda: return "qda";
    }
    throw std::logic_error("simgen: invalid kind");
}

// The default coefficient curves below are fixed combinations of the first
// six cubic B-splines, scaled so that the latent-scale spread produces
// moderate class overlap (calibration notes in tests/simgen oracles).

Curve default_omp_beta(const TimeGrid& grid) {
    // latent scale sd ~ 6 against unit noise and the (0, 8) cut-points:
    // pre-balancing class probabilities ~ (0.45, 0.43, 0.12)
    Eigen::VectorXd c(6);
    c << 1.11, 1.94, 0.55, 2.50, 0.83, 1.66;
    return bspline_combination(grid, c);
}

std::vector<Curve> default_ump_betas(const TimeGrid& grid) {
    // contrast sd ~ 8.8 against the variance-2 differenced noise
    Eigen::VectorXd c1(6), c2(6), c3(6);
    c1 << 2.4, 1.8, 0.6, -0.6, -1.2, -1.8;
    c2 << -1.8, -0.6, 1.8, 1.8, -0.6, -1.8;
    c3 << -1.8, -1.2, -0.6, 0.6, 1.8, 2.4;
    return {bspline_combination(grid, c1), bspline_combination(grid, c2), bspline_combination(grid, c3)};
}

std::vector<Curve> default_mlo_betas(const TimeGrid& grid) {
    Eigen::VectorXd c1(6), c2(6);
    c1 << 1.75, 1.25, 0.5, -0.5, -1.25, -1.75;
    c2 << -1.75, -0.5, 1.25, 1.25, -0.5, -1.75;
    return {bspline_combination(grid, c1), bspline_combination(grid, c2)};
}

LabeledFunctionalDataset generate_omp(int n_total, const Curve& beta, const std::vector<double>& cutpoints,
                                      const TimeGrid& grid, RngStream& rng) {
    if (cutpoints.size() < 2 || cutpoints.front() != -kInf || cutpoints.back() != kInf) {
        throw std::invalid_argument("generate_omp: cutpoints must run from -inf to +inf");
    }
    for (std::size_t j = 1; j < cutpoints.size(); ++j) {
        if (!(cutpoints[j] > cutpoints[j - 1])) {
            throw std::invalid_argument("generate_omp: cutpoints must be strictly increasing");
        }
    }
    const int K = static_cast<int>(cutpoints.size()) - 1;
    const Eigen::VectorXd w = simpson_weights(grid);
    const GpSampler gp = multinomial_gp(grid);
    return rejection_balanced(n_total, K, grid, gp, rng, [&](const std::vector<double>& x, RngStream& sub) {
        const double v = inner_product(beta, x, w) + sub.normal();
        int k = 0;
        while (k + 1 < K && v > cutpoints[static_cast<std::size_t>(k + 1)]) ++k;
        return k;
    });
}

LabeledFunctionalDataset generate_ump(int n_total, const std::vector<Curve>& betas, const TimeGrid& grid,
                                      RngStream& rng) {
    const int K = static_cast<int>(betas.size());
    if (K < 2) throw std::invalid_argument("generate_ump: need at least two coefficient curves");
    const Eigen::VectorXd w = simpson_weights(grid);
    const GpSampler gp = multinomial_gp(grid);
    return rejection_balanced(n_total, K, grid, gp, rng, [&](const std::vector<double>& x, RngStream& sub) {
        int best = 0;
        double best_v = -kInf;
        for (int l = 0; l < K; ++l) {
            const double v = inner_product(betas[static_cast<std::size_t>(l)], x, w) + sub.normal();
            if (v > best_v) {
                best_v = v;
                best = l;
            }
        }
        return best;
    });
}

LabeledFunctionalDataset generate_mlo(int n_total, const std::vector<Curve>& betas, const TimeGrid& grid,
                                      RngStream& rng) {
    const int K = static_cast<int>(betas.size()) + 1;  // beta_K = 0 implicit
    const Eigen::VectorXd w = simpson_weights(grid);
    const GpSampler gp = multinomial_gp(grid);
    return rejection_balanced(n_total, K, grid, gp, rng, [&](const std::vector<double>& x, RngStream&) {
        // argmax of the softmax = argmax of the logits (0 for category K);
        // ties break to the smallest index.
        int best = K - 1;
        double best_v = 0.0;
        for (int l = K - 2; l >= 0; --l) {
            const double v = inner_product(betas[static_cast<std::size_t>(l)], x, w);
            if (v >= best_v) {
                best_v = v;
                best = l;
            }
        }
        return best;
    });
}

LabeledFunctionalDataset generate_lda(int n_per_class, const TimeGrid& grid, RngStream& rng) {
    const std::vector<MeanFn> means = {
        [](double t) { return std::sin(t) + 2.0 * std::cos(t); },
        [](double t) { return std::sin(t); },
        [](double t) { return std::sin(t) - 3.0 * std::cos(t); },
    };
    const KernelFn shared = [](double s, double t) { return std::exp(-30.0 * (s - t) * (s - t)); };
    return generate_gaussian_classes(n_per_class, grid, means, {shared, shared, shared}, rng);
}

LabeledFunctionalDataset generate_qda(int n_per_class, const TimeGrid& grid, RngStream& rng) {
    const std::vector<MeanFn> means = {
        [](double t) { return std::sin(t) + 2.0 * std::cos(t); },
        [](double t) { return std::sin(t); },
        [](double t) { return std::sin(t) - 3.0 * std::cos(t); },
    };
    const std::vector<KernelFn> kernels = {
        [](double s, double t) {
            const double u = std::sin(M_PI * (s - t));
            return std::exp(-2.0 * u * u);
        },
        [](double s, double t) { return std::exp(-30.0 * (s - t) * (s - t)); },
        [](double s, double t) { return std::exp(-std::abs(s - t)); },
    };
    return generate_gaussian_classes(n_per_class, grid, means, kernels, rng);
}

LabeledFunctionalDataset generate(const GeneratorSpec& spec) {
    RngStream rng(spec.seed, /*stream=*/7);
    const int n_total = 3 * spec.n_per_class;
    switch (spec.kind) {
        case Kind::omp:
            return generate_omp(n_total, default_omp_beta(spec.grid), {-kInf, 0.0, 8.0, kInf}, spec.grid, rng);
        case Kind::ump:
            return generate_ump(n_total, default_ump_betas(spec.grid), spec.grid, rng);
        case Kind::mlo:
            return generate_mlo(n_total, default_mlo_betas(spec.grid), spec.grid, rng);
        case Kind::lda:
            return generate_lda(spec.n_per_class, spec.grid, rng);
        case Kind::qda:
            return generate_qda(spec.n_per_class, spec.grid, rng);
    }
    throw std::logic_error("simgen: invalid kind");
}

}  // namespace fclass::simgen
