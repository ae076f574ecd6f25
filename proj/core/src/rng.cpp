#include "fclass/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "fclass/distributions.hpp"

namespace fclass {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_identity(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9E3779B97F4A7C15ULL);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix_identity(seed, stream)) {}

RngStream RngStream::substream(std::uint64_t id) const {
    return RngStream(mix_identity(seed_, stream_), id);
}

double RngStream::uniform() {
    // 53-bit mantissa, offset by half an ulp so 0 and 1 are never returned.
    const std::uint64_t x = engine_() >> 11;
    return (static_cast<double>(x) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RngStream::uniform_below: bound must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x > limit);
    return x % bound;
}

double RngStream::normal() { return normal_quantile(uniform()); }

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("RngStream::gamma: shape must be positive");
    // Marsaglia-Tsang, with the boost u^(1/a) for shape < 1.
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace fclass
