#pragma once

#include "phaselim/densities.hpp"
#include "phaselim/model.hpp"
#include "phaselim/noise.hpp"
#include "phaselim/numerics.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace phaselim {

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct VerificationReport {
    std::string check;
    nlohmann::json params = nlohmann::json::object();
    double estimate = 0.0;
    double standard_error = 0.0;
    double lower_bound = -std::numeric_limits<double>::infinity();
    double upper_bound = std::numeric_limits<double>::infinity();
    std::size_t trials = 0;
    double resolution = 0.01;
    double clamped_fraction = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

inline constexpr double kMaxClampedFraction = 1e-3;

// inconclusive if se > resolution or too many clamped densities; otherwise
// pass iff estimate ∈ [lower - 3se, upper + 3se]
Verdict recompute_verdict(const VerificationReport& report);

// Infinite bounds serialize as null.
nlohmann::json to_json(const VerificationReport& report);
VerificationReport report_from_json(const nlohmann::json& record);
void write_json_lines(std::ostream& out, std::span<const VerificationReport> reports);

struct VerifyOptions {
    double resolution = 0.01;
    unsigned threads = 1;
    DensityOptions density{};
};

struct MiEstimate {
    double mean;
    double standard_error;
    double clamped_fraction;
    std::size_t trials;
};

// Monte-Carlo estimate of I(X_dif; Y | X_eq, β = b) from draws of
// Y = |sqrt(v_eq) W_eq + sqrt(v_dif) W_dif|² + Z.
MiEstimate mi_estimate(const PartitionPowers& powers, const NoiseModel& noise, std::size_t trials, std::uint64_t seed,
                       const VerifyOptions& options = {});

VerificationReport sandwich_check(const PartitionPowers& powers, const NoiseModel& noise, std::size_t trials,
                                  std::uint64_t seed, const VerifyOptions& options = {});

struct ConcentrationSetup {
    double b_norm_sq;
    PartitionPowers powers;
    NoiseModel noise;
    std::size_t n = 20;
    std::vector<double> mu_grid{0.0, 0.01, 0.02, 0.05};
    std::size_t trials = 10000;
};

// Two reports per μ (lower and upper tail of iⁿ - nI against ±2nCμ), each
// compared with exp(-nC r(μ)) + exp(-nC r(-μ)). `info` must be precise to
// 0.3% of its value.
std::vector<VerificationReport> concentration_check(const ConcentrationSetup& setup, const MiEstimate& info,
                                                    std::uint64_t seed, const VerifyOptions& options = {});

inline double g_convergence_tolerance(std::size_t k) { return 5.0 / std::sqrt(static_cast<double>(k)); }

// sup over the α grid of |Σ_{i≤⌊αk⌋} |β'_i|² / c_β - g(α)| for one Gaussian draw.
double g_deviation(double c_beta, std::size_t k, std::span<const double> alpha_grid, std::uint64_t seed);
VerificationReport g_convergence_check(double c_beta, std::size_t k, std::span<const double> alpha_grid,
                                       std::uint64_t seed);

struct LogConcavityCase {
    double lambda;
    double v;
    double sigma;
};

inline constexpr double kSecondDifferenceTolerance = 1e-6;

// Largest centered second difference of a log-density on a uniform grid.
double max_second_difference(const std::function<double(double)>& log_density, double lo, double hi, double step);

std::vector<VerificationReport> logconcavity_check(std::span<const LogConcavityCase> battery,
                                                   const VerifyOptions& options = {});
// Same test applied to an equal mixture of N(-2, 0.5²) and N(2, 0.5²); must fail.
VerificationReport bimodal_negative_control();

// Default batteries.
std::vector<std::pair<PartitionPowers, double>> sandwich_battery();  // (powers, σ)
std::vector<LogConcavityCase> logconcavity_battery();
std::vector<ConcentrationSetup> concentration_battery(std::size_t trials);
std::vector<double> default_alpha_grid(double step = 0.01);

}  // namespace phaselim
