#pragma once

#include "phaselim/model.hpp"
#include "phaselim/noise.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phaselim {

enum class DecoderKind { FlatMl, McMarginal };
std::string_view to_string(DecoderKind kind);
DecoderKind parse_decoder(std::string_view text);

inline constexpr double kMaxSupports = 1e4;

struct SimConfig {
    std::size_t p = 10;
    std::size_t k = 2;
    std::vector<std::size_t> n_grid{0};
    double alpha_star = 0.5;
    SignalModel signal = SignalModel::discrete_flat(1.0, 2);
    NoiseModel noise = NoiseModel::gaussian(1e-6);
    std::size_t trials = 100;
    DecoderKind decoder = DecoderKind::FlatMl;
    std::size_t mc_samples = 256;
    std::uint64_t master_seed = 1;
    unsigned threads = 1;
};

double binomial_coefficient(std::size_t n, std::size_t k);

// Checks the exhaustive-search guard C(p,k) <= 1e4, floor(α* k) >= 1 and that
// the decoder can handle the signal law.
void validate(const SimConfig& config);

// All k-subsets of {0..p-1} in lexicographic order.
std::vector<std::vector<std::size_t>> all_supports(std::size_t p, std::size_t k);

// Exhaustive likelihood decoder. Ties go to the lexicographically first support.
SupportSet decode(const ProblemInstance& instance, const SimConfig& config, std::uint64_t decoder_seed);

// |S \ Ŝ| >= floor(α* k)
bool error_event(const SupportSet& truth, const SupportSet& estimate, std::size_t k, double alpha_star);

struct ErrorPoint {
    std::size_t n;
    double pe;
    double se;
    std::size_t trials;
};
using ErrorCurve = std::vector<ErrorPoint>;

ErrorCurve error_curve(const SimConfig& config);

void write_error_curve_csv(std::ostream& out, std::span<const ErrorPoint> curve,
                           std::span<const std::string> comments = {});

// Weighted pool-adjacent-violators fit of a nonincreasing sequence.
std::vector<double> isotonic_nonincreasing(std::span<const double> values, std::span<const double> weights);
// Largest |pe - fit| against the nonincreasing fit.
double isotonic_residual(std::span<const ErrorPoint> curve);
// sqrt(p̄(1-p̄)/trials) with p̄ the trial-weighted mean error rate.
double pooled_standard_error(std::span<const ErrorPoint> curve);

// "a,b,c" or "start:stop:step" (inclusive).
std::vector<std::size_t> parse_n_grid(std::string_view text);

// Flat key-value ("key = value" lines, '#' comments) or a JSON object.
// Keys: p, k, n_grid, alpha_star, signal (flat|gaussian), c_beta, sigma2,
// trials, decoder (flat-ml|mc-marginal), mc_samples, seed, threads.
SimConfig parse_sim_config(std::string_view text);

}  // namespace phaselim
