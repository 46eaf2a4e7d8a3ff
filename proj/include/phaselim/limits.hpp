#pragma once

#include "phaselim/model.hpp"
#include "phaselim/noise.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phaselim {

// g(α) = ∫_0^∞ [α - F_1(u)]^+ du with F_1(u) = 1 - e^{-u}; the integrand
// vanishes beyond -ln(1-α), so the quadrature runs on that interval.
double g_fraction(double alpha);

// Closed-form bounds on I(X_dif; Y | X_eq, β = b) in terms of the partition
// powers (lower: entropy-power route; upper: reverse entropy power plus the
// Gaussian maximum-entropy bound).
double mi_lower_bound(double v_dif, const NoiseModel& noise);
double mi_upper_bound(double v_dif, double v_eq, const NoiseModel& noise);

// Discrete β: the ⌊αk⌋ smallest entries form s_dif.
double I1_discrete(double alpha, const SortedSignal& sorted, const NoiseModel& noise,
                   PartitionMode mode = PartitionMode::FloorExact);
double I2_discrete(double alpha, const SortedSignal& sorted, const NoiseModel& noise,
                   PartitionMode mode = PartitionMode::FloorExact);

// Gaussian β with σ_β² = c_β/k and N(0, σ²) noise.
double I1_gaussian(double alpha, double c_beta, double sigma);
double I2_gaussian(double alpha, double c_beta, double sigma);

struct ThresholdQuery {
    std::size_t p = 0;
    std::size_t k = 0;
    double alpha_star = 0.1;
    SignalModel signal = SignalModel::discrete_flat(1.0, 1);
    NoiseModel noise = NoiseModel::gaussian(1.0);
    PartitionMode mode = PartitionMode::FloorExact;
    double alpha_grid_step = 1e-3;
};

struct ThresholdResult {
    double n_achievability = 0.0;
    double n_converse = 0.0;
    double alpha_ach = 0.0;
    double alpha_con = 0.0;
    double normalized_ach = 0.0;  // n / (k ln(p/k))
    double normalized_con = 0.0;
};

// Leading-order thresholds (η = 0):
//   n_ach = max_{α∈[α*,1]} α k ln(p/k) / I_1(α)
//   n_con = max_{α∈[α*,1]} (α-α*) k ln(p/k) / I_2(α)
// Maximized on a uniform α grid, then refined by golden-section search
// between the neighbours of the best grid point.
ThresholdResult threshold(const ThresholdQuery& query);

// Text attached to reports: the thresholds are asymptotic statements and the
// validity conditions depend on the scaling regime.
std::string regime_caveat(const SignalModel& signal);

// SNR = 2 (||b||²)² / σ² (k → ∞ form), in dB via 10·log10.
double snr_linear(const SignalModel& signal, const NoiseModel& noise);
double snr_db(const SignalModel& signal, const NoiseModel& noise);
double c_beta_from_snr_db(double snr_db, double sigma);

enum class ModelKind { DiscreteFlat, Gaussian };
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct FigureRow {
    double snr_db;
    double n_ach_norm;
    double n_con_norm;
};

// Normalized asymptotic thresholds over an SNR grid (σ = 1).
std::vector<FigureRow> figure_data(double alpha_star, std::span<const double> snr_db_grid, ModelKind kind,
                                   double alpha_grid_step = 1e-3);
void write_figure_csv(std::ostream& out, std::span<const FigureRow> rows);

}  // namespace phaselim
