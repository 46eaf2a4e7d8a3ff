#include "phaselim/limits.hpp"

#include "phaselim/errors.hpp"
#include "phaselim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace phaselim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
}

}  // namespace

double g_fraction(double alpha) {
    require_alpha(alpha);
    if (alpha == 0.0) return 0.0;
    if (alpha == 1.0) return 1.0;
    const double upper = -std::log1p(-alpha);
    // α - (1 - e^{-u}) = e^{-u} (1 - e^{u - upper}), free of cancellation
    return integrate([upper](double u) { return -std::exp(-u) * std::expm1(u - upper); }, 0.0, upper,
                     QuadratureOptions{1e-12, 20});
}

double mi_lower_bound(double v_dif, const NoiseModel& noise) {
    return 0.5 * std::log(4.0 / noise.entropy_power() * v_dif * v_dif + 1.0);
}

double mi_upper_bound(double v_dif, double v_eq, const NoiseModel& noise) {
    const double n0 = noise.entropy_power() / (2.0 * kPi * kE);
    return 0.5 * std::log(kPi * kE / 2.0) + 0.5 * std::log(2.0 * kPi * kE / noise.entropy_power() * v_dif * v_dif + 1.0) +
           0.5 * std::log(1.0 + v_dif * v_eq / (v_dif * v_dif + n0));
}

double I1_discrete(double alpha, const SortedSignal& sorted, const NoiseModel& noise, PartitionMode mode) {
    return mi_lower_bound(partition_powers(sorted, alpha, mode).v_dif, noise);
}

double I2_discrete(double alpha, const SortedSignal& sorted, const NoiseModel& noise, PartitionMode mode) {
    const auto powers = partition_powers(sorted, alpha, mode);
    return mi_upper_bound(powers.v_dif, powers.v_eq, noise);
}

double I1_gaussian(double alpha, double c_beta, double sigma) {
    const double ratio = c_beta * g_fraction(alpha) / (sigma * std::sqrt(2.0 * kPi * kE));
    return 0.5 * std::log(1.0 + 4.0 * ratio * ratio);
}

double I2_gaussian(double alpha, double c_beta, double sigma) {
    const double g = g_fraction(alpha);
    const double snr = c_beta * g / sigma;
    return 0.5 * std::log(1.0 + snr * snr) +
           0.5 * std::log(1.0 + c_beta * c_beta * g * (1.0 - g) / (g * g * c_beta * c_beta + sigma * sigma)) +
           0.5 * std::log(kPi * kE / 2.0);
}

namespace {

struct Maximum {
    double alpha;
    double value;
};

Maximum maximize_over_alpha(const std::function<double(double)>& objective, double alpha_star, double step) {
    const auto count = static_cast<std::size_t>(std::ceil((1.0 - alpha_star) / step - 1e-9));
    std::vector<double> grid;
    grid.reserve(count + 1);
    for (std::size_t j = 0; j < count; ++j) grid.push_back(alpha_star + step * static_cast<double>(j));
    grid.push_back(1.0);

    std::size_t best = 0;
    double best_value = -kInf;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double value = objective(grid[j]);
        if (value > best_value) {
            best_value = value;
            best = j;
        }
    }
    Maximum out{grid[best], best_value};
    if (!std::isfinite(best_value) || grid.size() < 2) return out;
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const auto refined = golden_section_max(objective, lo, hi, 1e-10);
    if (refined.value > out.value) out = {refined.x, refined.value};
    return out;
}

}  // namespace

ThresholdResult threshold(const ThresholdQuery& query) {
    if (!(query.alpha_star > 0.0 && query.alpha_star < 1.0)) {
        throw std::invalid_argument("alpha_star must lie in the open interval (0, 1)");
    }
    if (query.k == 0 || query.k >= query.p) throw std::invalid_argument("need 1 <= k < p");
    if (query.signal.k() != query.k) throw std::invalid_argument("signal model k does not match the query");
    if (!(query.alpha_grid_step > 0.0 && query.alpha_grid_step <= 1.0)) {
        throw std::invalid_argument("alpha grid step must lie in (0, 1]");
    }

    std::function<double(double)> info1;
    std::function<double(double)> info2;
    if (std::holds_alternative<GaussianIid>(query.signal.law())) {
        if (query.noise.kind() != NoiseModel::Kind::Gaussian) {
            throw Unsupported("Gaussian-signal thresholds require Gaussian noise");
        }
        const double c = query.signal.c_beta();
        const double sigma = query.noise.sigma();
        info1 = [c, sigma](double a) { return I1_gaussian(a, c, sigma); };
        info2 = [c, sigma](double a) { return I2_gaussian(a, c, sigma); };
    } else {
        if (query.mode == PartitionMode::FloorExact && floor_fraction(query.alpha_star, query.k) < 1) {
            throw std::invalid_argument("floor-exact mode needs floor(alpha_star * k) >= 1");
        }
        auto sorted = std::make_shared<SortedSignal>(query.signal.fixed_vector());
        const NoiseModel noise = query.noise;
        const PartitionMode mode = query.mode;
        info1 = [sorted, noise, mode](double a) { return I1_discrete(a, *sorted, noise, mode); };
        info2 = [sorted, noise, mode](double a) { return I2_discrete(a, *sorted, noise, mode); };
    }

    const double scale = static_cast<double>(query.k) *
                         std::log(static_cast<double>(query.p) / static_cast<double>(query.k));
    const double a_star = query.alpha_star;
    bool any_positive = false;
    auto ach = [&](double a) {
        const double info = info1(a);
        if (!(info > 0.0)) return kInf;
        any_positive = true;
        return a * scale / info;
    };
    auto con = [&](double a) {
        const double info = info2(a);
        if (!(info > 0.0)) return kInf;
        return (a - a_star) * scale / info;
    };

    const auto best_ach = maximize_over_alpha(ach, a_star, query.alpha_grid_step);
    if (!any_positive) throw InfeasibleThreshold("mutual information is zero for every alpha in [alpha*, 1]");
    const auto best_con = maximize_over_alpha(con, a_star, query.alpha_grid_step);

    ThresholdResult out;
    out.n_achievability = best_ach.value;
    out.alpha_ach = best_ach.alpha;
    out.n_converse = std::max(best_con.value, 0.0);
    out.alpha_con = best_con.alpha;
    out.normalized_ach = out.n_achievability / scale;
    out.normalized_con = out.n_converse / scale;
    return out;
}

std::string regime_caveat(const SignalModel& signal) {
    std::string text =
        "Leading-order asymptotic thresholds (p -> infinity, k -> infinity, eta = 0); not finite-p predictions.";
    if (std::holds_alternative<GaussianIid>(signal.law())) {
        text += " Achievability assumes log k = o(log p); the converse assumes k = o(p).";
    } else {
        text += " Achievability assumes either m_beta = Theta(1) with k = o(p), or log k = o(log p);"
                " the converse assumes k = o(p). Entries must satisfy |b_min| = Theta(|b_max|) and ||b||_2 = Theta(1).";
    }
    return text;
}

double snr_linear(const SignalModel& signal, const NoiseModel& noise) {
    const double power = signal.c_beta();
    return 2.0 * power * power / noise.variance();
}

double snr_db(const SignalModel& signal, const NoiseModel& noise) { return 10.0 * std::log10(snr_linear(signal, noise)); }

double c_beta_from_snr_db(double snr_db_value, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    return sigma * std::sqrt(std::pow(10.0, snr_db_value / 10.0) / 2.0);
}

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::Gaussian ? "gaussian" : "discrete-flat";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "gaussian") return ModelKind::Gaussian;
    if (text == "discrete-flat" || text == "flat") return ModelKind::DiscreteFlat;
    throw std::invalid_argument("unknown model kind '" + std::string(text) + "'");
}

std::vector<FigureRow> figure_data(double alpha_star, std::span<const double> snr_db_grid, ModelKind kind,
                                   double alpha_grid_step) {
    // The normalized asymptotic curves do not depend on p and k; these only
    // have to satisfy k < p.
    constexpr std::size_t k = 1000;
    constexpr std::size_t p = 1000000;
    std::vector<FigureRow> rows;
    rows.reserve(snr_db_grid.size());
    for (double db : snr_db_grid) {
        if (!std::isfinite(db)) throw std::invalid_argument("SNR grid must be finite");
        const double c = c_beta_from_snr_db(db, 1.0);
        ThresholdQuery query;
        query.p = p;
        query.k = k;
        query.alpha_star = alpha_star;
        query.signal = kind == ModelKind::Gaussian ? SignalModel::gaussian_iid(c, k) : SignalModel::discrete_flat(c, k);
        query.noise = NoiseModel::gaussian(1.0);
        query.mode = PartitionMode::Asymptotic;
        query.alpha_grid_step = alpha_grid_step;
        const auto result = threshold(query);
        rows.push_back({db, result.normalized_ach, result.normalized_con});
    }
    return rows;
}

void write_figure_csv(std::ostream& out, std::span<const FigureRow> rows) {
    out << "snr_db,n_ach_norm,n_con_norm\n";
    char line[128];
    for (const auto& row : rows) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", row.snr_db, row.n_ach_norm, row.n_con_norm);
        out << line;
    }
}

}  // namespace phaselim
