#include "phaselim/densities.hpp"

#include "phaselim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace phaselim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_scale(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("scale v must be positive and finite");
}

// Smallest d in {w, 2w, 4w, ...} with f(center + sign·d) below `floor`, or the
// boundary when the search would cross it.
double expand_until_below(const std::function<double(double)>& f, double center, double sign, double w, double floor,
                          double boundary) {
    double d = w;
    for (int i = 0; i < 200; ++i) {
        const double x = center + sign * d;
        if (sign < 0 && x <= boundary) return boundary;
        if (f(x) < floor) return x;
        d *= 2.0;
    }
    throw NumericFailure("integration window search did not terminate");
}

}  // namespace

double bessel_i0_scaled(double x) {
    x = std::abs(x);
    if (x < 30.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return sum * std::exp(-x);
    }
    // e^{-x} I0(x) ~ (2πx)^{-1/2} Σ ((2k-1)!!)² / (k! (8x)^k); the terms shrink
    // until k ≈ 2x, so at x >= 30 the truncation error is far below 1e-16.
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (static_cast<double>(k) * 8.0 * x);
        if (next >= term) break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double noncentral_chi2_scaled_log_pdf(double u, double lambda, double v) {
    require_scale(v);
    if (!(lambda >= 0.0)) throw std::invalid_argument("non-centrality must be non-negative");
    if (u < 0.0) return -kInf;
    const double root_u = std::sqrt(u);
    const double root_l = std::sqrt(lambda);
    const double gap = root_u - root_l;
    return -std::log(v) - gap * gap / v + std::log(bessel_i0_scaled(2.0 * root_u * root_l / v));
}

double noncentral_chi2_scaled_pdf(double u, double lambda, double v) {
    return std::exp(noncentral_chi2_scaled_log_pdf(u, lambda, v));
}

double conditional_output_variance(double v, double lambda) { return v * v + 2.0 * v * lambda; }

double log_normal_cdf(double x) {
    if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    // Mills-ratio series: Φ(x) = φ(x)/|x| · (1 - 1/x² + 3/x⁴ - ...).
    const double inv = 1.0 / (x * x);
    double term = 1.0;
    double series = 1.0;
    for (int k = 1; k <= 10; ++k) {
        term *= -(2.0 * k - 1.0) * inv;
        series += term;
    }
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double emg_log_pdf(double y, double v, const NoiseModel& noise) {
    require_scale(v);
    const double s = noise.sigma();
    const double x = y / s - s / v;
    if (x > -30.0) return -std::log(v) + 0.5 * s * s / (v * v) - y / v + log_normal_cdf(x);
    // Expand log Φ(x) and cancel its -x²/2 against the exponential terms by hand.
    const double inv = 1.0 / (x * x);
    double term = 1.0;
    double series = 1.0;
    for (int k = 1; k <= 10; ++k) {
        term *= -(2.0 * k - 1.0) * inv;
        series += term;
    }
    return -std::log(v) - 0.5 * y * y / (s * s) - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
           std::log(series);
}

double log_f_y_given_xeq(double y, const ConditionalOutputLaw& law, const DensityOptions& options) {
    if (!std::isfinite(y)) throw std::invalid_argument("y must be finite");
    require_scale(law.scale);
    if (!(law.mean_shift >= 0.0) || !std::isfinite(law.mean_shift)) {
        throw std::invalid_argument("mean shift must be non-negative and finite");
    }
    const double lambda = law.mean_shift;
    const double v = law.scale;
    const NoiseModel& noise = law.noise;
    auto log_integrand = [&](double u) { return noncentral_chi2_scaled_log_pdf(u, lambda, v) + noise.log_pdf(y - u); };

    // Both factors are log-concave in u, so the integrand is unimodal.
    const double spread = std::sqrt(conditional_output_variance(v, lambda));
    const double width = 0.5 * std::min(noise.scale(), spread);
    const double hi_guess = std::max({y, lambda, 0.0}) + noise.scale() + spread;
    const auto mode = golden_section_max(log_integrand, 0.0, hi_guess, 1e-3 * width);
    const double peak = mode.value;
    if (!std::isfinite(peak)) throw NumericFailure("convolution integrand has no finite maximum");

    const double floor = peak - options.window_log_drop;
    const double hi = expand_until_below(log_integrand, mode.x, +1.0, width, floor, kInf);
    const double lo = mode.x <= 0.0 ? 0.0 : expand_until_below(log_integrand, mode.x, -1.0, width, floor, 0.0);
    const double mass =
        integrate([&](double u) { return std::exp(log_integrand(u) - peak); }, lo, hi, options.quadrature);
    if (!(mass > 0.0)) return -kInf;
    return peak + std::log(mass);
}

double f_y_given_xeq(double y, const ConditionalOutputLaw& law, const DensityOptions& options) {
    return std::exp(log_f_y_given_xeq(y, law, options));
}

InfoDensity info_density_single(Complex x_dif_proj, Complex x_eq_proj, double y, const PartitionPowers& powers,
                                const NoiseModel& noise, const DensityOptions& options) {
    if (!(powers.v_dif > 0.0)) throw std::invalid_argument("information density needs v_dif > 0");
    const double numerator = noise.log_pdf(y - std::norm(x_eq_proj + x_dif_proj));
    const ConditionalOutputLaw law{std::norm(x_eq_proj), powers.v_dif, noise};
    double denominator = log_f_y_given_xeq(y, law, options);
    InfoDensity out;
    if (!(denominator >= kLogFloor)) {
        denominator = kLogFloor;
        out.clamped = true;
    }
    out.value = numerator - denominator;
    return out;
}

InfoDensitySum info_density_n(std::span<const MeasurementProjection> slice, const PartitionPowers& powers,
                              const NoiseModel& noise, const DensityOptions& options) {
    InfoDensitySum out;
    KahanSum acc;
    for (const auto& row : slice) {
        const auto single = info_density_single(row.dif, row.eq, row.y, powers, noise, options);
        acc.add(single.value);
        if (single.clamped) ++out.clamped;
    }
    out.value = acc.value();
    return out;
}

PartitionedSlice project_instance(const ProblemInstance& instance, std::span<const std::size_t> dif_positions) {
    const auto b = instance.beta_on_support();
    std::vector<bool> in_dif(b.size(), false);
    for (std::size_t pos : dif_positions) {
        if (pos >= b.size()) throw std::invalid_argument("partition position outside the support");
        in_dif[pos] = true;
    }
    PartitionedSlice out;
    for (std::size_t j = 0; j < b.size(); ++j) {
        (in_dif[j] ? out.powers.v_dif : out.powers.v_eq) += std::norm(b[j]);
        if (in_dif[j]) ++out.powers.ell;
    }
    const auto support = instance.support.indices();
    out.rows.reserve(instance.n);
    for (std::size_t i = 0; i < instance.n; ++i) {
        MeasurementProjection row{{0.0, 0.0}, {0.0, 0.0}, instance.y[i]};
        for (std::size_t j = 0; j < b.size(); ++j) {
            const Complex term = std::conj(instance.x(i, support[j])) * b[j];
            (in_dif[j] ? row.dif : row.eq) += term;
        }
        out.rows.push_back(row);
    }
    return out;
}

double rate_function(double u) {
    if (!(u > -1.0)) return kInf;
    return u - std::log1p(u);
}

namespace {

struct OutputShape {
    double mode;
    double log_peak;
};

OutputShape output_shape(double b_norm_sq, const NoiseModel& noise) {
    require_scale(b_norm_sq);
    const double s = noise.scale();
    auto f = [&](double y) { return emg_log_pdf(y, b_norm_sq, noise); };
    const auto best = golden_section_max(f, -8.0 * s - b_norm_sq, 8.0 * s + b_norm_sq,
                                         1e-9 * std::min(s, b_norm_sq));
    return {best.x, best.value};
}

double d_objective_at(double t, double b_norm_sq, const NoiseModel& noise, const OutputShape& shape,
                      const DOptions& options) {
    auto h = [&](double y) { return t * (emg_log_pdf(y, b_norm_sq, noise) - shape.log_peak); };
    const double width = std::min(noise.scale(), b_norm_sq);
    const double floor = -options.window_log_drop;
    const double hi = expand_until_below(h, shape.mode, +1.0, width, floor, kInf);
    const double lo = expand_until_below(h, shape.mode, -1.0, width, floor, -kInf);
    const double mass = integrate([&](double y) { return std::exp(h(y)); }, lo, hi, options.quadrature);
    const double log_m = shape.log_peak;
    const double log_m_plus_one = std::log1p(std::exp(log_m));
    return t * std::exp(t * (log_m - log_m_plus_one)) * mass;
}

}  // namespace

double output_peak_density(double b_norm_sq, const NoiseModel& noise) {
    return std::exp(output_shape(b_norm_sq, noise).log_peak);
}

double d_objective(double t, double b_norm_sq, const NoiseModel& noise, const DOptions& options) {
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    return d_objective_at(t, b_norm_sq, noise, output_shape(b_norm_sq, noise), options);
}

DResult compute_D_detail(double b_norm_sq, const NoiseModel& noise, const DOptions& options) {
    if (!(b_norm_sq > 0.0)) throw std::invalid_argument("||b||² must be positive");
    if (options.scan_points < 3 || !(options.log_t_max > options.log_t_min)) {
        throw std::invalid_argument("invalid t search range");
    }
    const auto shape = output_shape(b_norm_sq, noise);
    auto objective = [&](double log_t) { return d_objective_at(std::exp(log_t), b_norm_sq, noise, shape, options); };
    const std::size_t m = options.scan_points;
    const double step = (options.log_t_max - options.log_t_min) / static_cast<double>(m - 1);
    std::size_t best = 0;
    double best_value = -kInf;
    for (std::size_t i = 0; i < m; ++i) {
        const double value = objective(options.log_t_min + step * static_cast<double>(i));
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    const double lo = options.log_t_min + step * static_cast<double>(best == 0 ? 0 : best - 1);
    const double hi = options.log_t_min + step * static_cast<double>(std::min(best + 1, m - 1));
    const auto refined = golden_section_max(objective, lo, hi, 1e-7);
    DResult out{best_value, std::exp(options.log_t_min + step * static_cast<double>(best)), std::exp(shape.log_peak)};
    if (refined.value > best_value) {
        out.value = refined.value;
        out.t_star = std::exp(refined.x);
    }
    if (!std::isfinite(out.value) || !(out.value > 0.0)) throw NumericFailure("D(b) is not finite and positive");
    return out;
}

double compute_D(double b_norm_sq, const NoiseModel& noise, const DOptions& options) {
    return compute_D_detail(b_norm_sq, noise, options).value;
}

double concentration_constant(double d_value, double peak_fz) {
    return 150.0 * std::max(2.0 * d_value * (peak_fz + 1.0), 1.0);
}

ConcentrationConstants compute_C(double b_norm_sq, const NoiseModel& noise, const DOptions& options) {
    const double d_value = compute_D(b_norm_sq, noise, options);
    const double peak = noise.peak_density();
    return {d_value, concentration_constant(d_value, peak), peak};
}

void write_density_trace(std::ostream& out, const ConditionalOutputLaw& law, std::span<const double> ys,
                         const DensityOptions& options) {
    out << "y,pdf,log_pdf\n";
    char line[128];
    for (double y : ys) {
        const double log_pdf = log_f_y_given_xeq(y, law, options);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", y, std::exp(log_pdf), log_pdf);
        out << line;
    }
}

}  // namespace phaselim
