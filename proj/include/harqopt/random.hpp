#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace harqopt {

/// Seeded random stream. Streams are keyed by (seed, stream index) so that
/// Monte Carlo work split into fixed blocks draws the same numbers no matter
/// how many threads process the blocks.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                               static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(sequence);
    }

    /// Unit-mean exponential: |h|^2 of a unit-power Rayleigh channel.
    double exponential() { return exponential_(engine_); }

    double normal() { return normal_(engine_); }

    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal() {
        constexpr double kHalfPowerScale = 0.70710678118654752440;
        const double re = normal();
        const double im = normal();
        return {kHalfPowerScale * re, kHalfPowerScale * im};
    }

private:
    std::mt19937_64 engine_;
    std::exponential_distribution<double> exponential_{1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace harqopt
