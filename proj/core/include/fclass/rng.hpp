#pragma once

#include <cstdint>
#include <random>

namespace fclass {

/// Splittable random stream. A stream is identified by (seed, stream id);
/// identical identifiers reproduce the identical draw sequence, so chains
/// running on different threads stay reproducible regardless of schedule.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

    /// Independent stream derived from this one's identity (not its state).
    RngStream substream(std::uint64_t id) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0,1).
    double uniform();

    /// Uniform integer in [0, bound), bound > 0. Unbiased.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Standard normal via inverse CDF (keeps sequences engine-defined only).
    double normal();

    /// Gamma(shape, 1), shape > 0.
    double gamma(double shape);

    double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace fclass
