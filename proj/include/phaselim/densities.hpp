#pragma once

#include "phaselim/model.hpp"
#include "phaselim/noise.hpp"
#include "phaselim/numerics.hpp"

#include <complex>
#include <iosfwd>
#include <span>

namespace phaselim {

// Smallest normal double exponent; log densities below it are clamped here.
inline constexpr double kLogFloor = -745.0;

// e^{-x} I_0(x) for x >= 0: power series below 12, Hankel asymptotic
// expansion above.
double bessel_i0_scaled(double x);

// Density of U = |c + sqrt(v) W|², W ~ CN(0,1), |c|² = lambda:
// (1/v) exp(-(u+λ)/v) I_0(2 sqrt(uλ)/v) for u >= 0.
double noncentral_chi2_scaled_pdf(double u, double lambda, double v);
double noncentral_chi2_scaled_log_pdf(double u, double lambda, double v);

// Var(U) for the law above: v² + 2vλ.
double conditional_output_variance(double v, double lambda);

// log Φ(x), accurate far into the lower tail.
double log_normal_cdf(double x);

// Y = U + Z given X_eq and β: U non-central as above with mean_shift λ =
// |⟨x_eq, b_eq⟩|² and scale v_dif.
struct ConditionalOutputLaw {
    double mean_shift = 0.0;
    double scale = 1.0;
    NoiseModel noise = NoiseModel::gaussian(1.0);
};

struct DensityOptions {
    QuadratureOptions quadrature{};
    // The convolution integrand is kept where it is within this many nats of
    // its maximum.
    double window_log_drop = 50.0;
};

// log f_{Y|X_eq,β}(y) by adaptive quadrature of the convolution, carried out
// in the log domain around the integrand's mode. Not clamped.
double log_f_y_given_xeq(double y, const ConditionalOutputLaw& law, const DensityOptions& options = {});
double f_y_given_xeq(double y, const ConditionalOutputLaw& law, const DensityOptions& options = {});

// Closed-form log density of Exp(mean v) + N(0, σ²) (the λ = 0 output law
// f_{Y|β} under Gaussian noise).
double emg_log_pdf(double y, double v, const NoiseModel& noise);

struct InfoDensity {
    double value = 0.0;
    bool clamped = false;
};

// Single-letter information density
//   log f_Z(y - |a_eq + a_dif|²) - log f_{Y|X_eq,β}(y)
// where a_dif = ⟨x_dif, b_dif⟩ and a_eq = ⟨x_eq, b_eq⟩. The denominator is
// clamped at kLogFloor and the clamp is flagged.
InfoDensity info_density_single(Complex x_dif_proj, Complex x_eq_proj, double y, const PartitionPowers& powers,
                                const NoiseModel& noise, const DensityOptions& options = {});

struct MeasurementProjection {
    Complex dif;  // ⟨x_dif^(i), b_dif⟩
    Complex eq;   // ⟨x_eq^(i), b_eq⟩
    double y;
};

struct InfoDensitySum {
    double value = 0.0;
    std::size_t clamped = 0;
};

InfoDensitySum info_density_n(std::span<const MeasurementProjection> slice, const PartitionPowers& powers,
                              const NoiseModel& noise, const DensityOptions& options = {});

// Projections of every measurement in `instance` onto the partition that
// puts the support positions in `dif_positions` (indices into the support,
// not into {0..p-1}) into s_dif. Also returns the matching powers.
struct PartitionedSlice {
    std::vector<MeasurementProjection> rows;
    PartitionPowers powers;
};
PartitionedSlice project_instance(const ProblemInstance& instance, std::span<const std::size_t> dif_positions);

// r(u) = u - ln(1+u) for u > -1, +inf otherwise.
double rate_function(double u);

struct DOptions {
    double log_t_min = -6.907755278982137;  // ln 1e-3
    double log_t_max = 6.907755278982137;   // ln 1e3
    std::size_t scan_points = 49;
    QuadratureOptions quadrature{1e-11, 20};
    double window_log_drop = 50.0;
};

// ||f_{Y|β}||_inf for ||b||² = b_norm_sq.
double output_peak_density(double b_norm_sq, const NoiseModel& noise);

// (M+1)^{-t} · t · ∫ f_{Y|β}^t(y) dy with M = ||f_{Y|β}||_inf.
double d_objective(double t, double b_norm_sq, const NoiseModel& noise, const DOptions& options = {});

struct DResult {
    double value;
    double t_star;
    double peak;  // M
};

// D(b) = sup_{t>0} d_objective(t): a scan over ln t followed by
// golden-section refinement between the neighbours of the best scan point.
DResult compute_D_detail(double b_norm_sq, const NoiseModel& noise, const DOptions& options = {});
double compute_D(double b_norm_sq, const NoiseModel& noise, const DOptions& options = {});

struct ConcentrationConstants {
    double D_b;
    double C_b;
    double peak_fz;
};

// C(b) = 150 · max{2 D(b) (||f_Z||_inf + 1), 1}.
double concentration_constant(double d_value, double peak_fz);
ConcentrationConstants compute_C(double b_norm_sq, const NoiseModel& noise, const DOptions& options = {});

// CSV trace "y,pdf,log_pdf" of f_{Y|X_eq,β} on the given grid.
void write_density_trace(std::ostream& out, const ConditionalOutputLaw& law, std::span<const double> ys,
                         const DensityOptions& options = {});

}  // namespace phaselim
