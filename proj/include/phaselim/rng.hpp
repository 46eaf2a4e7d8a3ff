#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace phaselim {

// xoshiro256** seeded through splitmix64. Every stream is addressed by
// (master_seed, tag, index), so a trial's draws never depend on which
// thread ran it or in which order.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on {0, ..., n-1}; n > 0.
    std::uint64_t uniform_index(std::uint64_t n);
    // Standard normal via Box-Muller (one value per call, no cached state).
    double normal();
    // CN(0, variance): variance/2 in each of the real and imaginary parts.
    std::complex<double> complex_normal(double variance = 1.0);

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Independent substream keyed by (master_seed, tag, index).
Rng substream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index);

// Stream tags used across modules; distinct values keep draws disjoint.
namespace stream {
inline constexpr std::uint64_t kSupport = 0x5355'5050;
inline constexpr std::uint64_t kBeta = 0x4245'5441;
inline constexpr std::uint64_t kMatrix = 0x4d41'5452;
inline constexpr std::uint64_t kNoise = 0x4e4f'4953;
inline constexpr std::uint64_t kTrial = 0x5452'4941;
inline constexpr std::uint64_t kDecoder = 0x4445'434f;
}  // namespace stream

}  // namespace phaselim
