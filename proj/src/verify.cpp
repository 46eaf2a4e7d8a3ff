#include "phaselim/verify.hpp"

#include "phaselim/limits.hpp"
#include "phaselim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace phaselim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

double number_or(const nlohmann::json& value, double fallback) {
    return value.is_null() ? fallback : value.get<double>();
}

nlohmann::json powers_json(const PartitionPowers& powers, const NoiseModel& noise) {
    return {{"v_dif", powers.v_dif}, {"v_eq", powers.v_eq}, {"sigma", noise.sigma()}};
}

}  // namespace

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict parse_verdict(std::string_view text) {
    if (text == "pass") return Verdict::Pass;
    if (text == "fail") return Verdict::Fail;
    if (text == "inconclusive") return Verdict::Inconclusive;
    throw std::invalid_argument("unknown verdict '" + std::string(text) + "'");
}

Verdict recompute_verdict(const VerificationReport& r) {
    if (!(r.standard_error <= r.resolution) || r.clamped_fraction > kMaxClampedFraction) return Verdict::Inconclusive;
    const double slack = 3.0 * r.standard_error;
    return (r.estimate >= r.lower_bound - slack && r.estimate <= r.upper_bound + slack) ? Verdict::Pass : Verdict::Fail;
}

nlohmann::json to_json(const VerificationReport& r) {
    nlohmann::json out;
    out["check"] = r.check;
    out["params"] = r.params;
    out["estimate"] = finite_or_null(r.estimate);
    out["se"] = r.standard_error;
    out["lower"] = finite_or_null(r.lower_bound);
    out["upper"] = finite_or_null(r.upper_bound);
    out["trials"] = r.trials;
    out["resolution"] = r.resolution;
    out["clamped_fraction"] = r.clamped_fraction;
    out["verdict"] = to_string(r.verdict);
    return out;
}

VerificationReport report_from_json(const nlohmann::json& record) {
    VerificationReport r;
    r.check = record.at("check").get<std::string>();
    r.params = record.at("params");
    r.estimate = number_or(record.at("estimate"), std::nan(""));
    r.standard_error = record.at("se").get<double>();
    r.lower_bound = number_or(record.at("lower"), -kInf);
    r.upper_bound = number_or(record.at("upper"), kInf);
    r.trials = record.at("trials").get<std::size_t>();
    r.resolution = record.at("resolution").get<double>();
    r.clamped_fraction = record.at("clamped_fraction").get<double>();
    r.verdict = parse_verdict(record.at("verdict").get<std::string>());
    return r;
}

void write_json_lines(std::ostream& out, std::span<const VerificationReport> reports) {
    for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

MiEstimate mi_estimate(const PartitionPowers& powers, const NoiseModel& noise, std::size_t trials, std::uint64_t seed,
                       const VerifyOptions& options) {
    if (!(powers.v_dif > 0.0)) throw std::invalid_argument("mutual information estimate needs v_dif > 0");
    if (trials < 2) throw std::invalid_argument("need at least two trials");
    const double root_dif = std::sqrt(powers.v_dif);
    const double root_eq = std::sqrt(powers.v_eq);
    std::vector<double> values(trials);
    std::vector<char> clamped(trials, 0);
    parallel_for(trials, options.threads, [&](std::size_t t) {
        auto rng = substream(seed, stream::kTrial, t);
        const Complex eq = root_eq * rng.complex_normal();
        const Complex dif = root_dif * rng.complex_normal();
        const double y = std::norm(eq + dif) + noise.sample(rng);
        const auto info = info_density_single(dif, eq, y, powers, noise, options.density);
        values[t] = info.value;
        clamped[t] = info.clamped ? 1 : 0;
    });
    const auto est = batch_mean(values);
    const auto clamped_count = std::count(clamped.begin(), clamped.end(), 1);
    return {est.mean, est.standard_error, static_cast<double>(clamped_count) / static_cast<double>(trials), trials};
}

VerificationReport sandwich_check(const PartitionPowers& powers, const NoiseModel& noise, std::size_t trials,
                                  std::uint64_t seed, const VerifyOptions& options) {
    const auto est = mi_estimate(powers, noise, trials, seed, options);
    VerificationReport r;
    r.check = "sandwich";
    r.params = powers_json(powers, noise);
    r.params["seed"] = seed;
    r.estimate = est.mean;
    r.standard_error = est.standard_error;
    r.lower_bound = mi_lower_bound(powers.v_dif, noise);
    r.upper_bound = mi_upper_bound(powers.v_dif, powers.v_eq, noise);
    r.trials = trials;
    r.resolution = options.resolution;
    r.clamped_fraction = est.clamped_fraction;
    r.verdict = recompute_verdict(r);
    return r;
}

std::vector<VerificationReport> concentration_check(const ConcentrationSetup& setup, const MiEstimate& info,
                                                    std::uint64_t seed, const VerifyOptions& options) {
    if (!(info.standard_error < 3e-3 * std::abs(info.mean))) {
        throw std::invalid_argument("mutual information estimate is not precise enough (se must be < 0.3% of I)");
    }
    if (setup.n == 0 || setup.trials < 2) throw std::invalid_argument("need n >= 1 and at least two trials");
    const auto constants = compute_C(setup.b_norm_sq, setup.noise);
    const double n = static_cast<double>(setup.n);
    const double nC = n * constants.C_b;
    const double center = n * info.mean;

    const double root_dif = std::sqrt(setup.powers.v_dif);
    const double root_eq = std::sqrt(setup.powers.v_eq);
    std::vector<double> deviations(setup.trials);
    std::vector<std::size_t> clamped(setup.trials, 0);
    parallel_for(setup.trials, options.threads, [&](std::size_t t) {
        auto rng = substream(seed, stream::kTrial, t);
        KahanSum sum;
        std::size_t clamps = 0;
        for (std::size_t i = 0; i < setup.n; ++i) {
            const Complex eq = root_eq * rng.complex_normal();
            const Complex dif = root_dif * rng.complex_normal();
            const double y = std::norm(eq + dif) + setup.noise.sample(rng);
            const auto d = info_density_single(dif, eq, y, setup.powers, setup.noise, options.density);
            sum.add(d.value);
            clamps += d.clamped ? 1 : 0;
        }
        deviations[t] = sum.value() - center;
        clamped[t] = clamps;
    });
    std::size_t clamp_total = 0;
    for (auto c : clamped) clamp_total += c;
    const double clamped_fraction = static_cast<double>(clamp_total) / (n * static_cast<double>(setup.trials));

    std::vector<VerificationReport> reports;
    const double trials = static_cast<double>(setup.trials);
    for (double mu : setup.mu_grid) {
        const double psi = std::exp(-nC * rate_function(mu)) + std::exp(-nC * rate_function(-mu));
        const double cut = 2.0 * nC * mu;
        for (int side = 0; side < 2; ++side) {
            std::size_t hits = 0;
            for (double d : deviations) hits += side == 0 ? (d <= -cut) : (d >= cut);
            const double rate = static_cast<double>(hits) / trials;
            VerificationReport r;
            r.check = "concentration";
            r.params = powers_json(setup.powers, setup.noise);
            r.params["b_norm_sq"] = setup.b_norm_sq;
            r.params["n"] = setup.n;
            r.params["mu"] = mu;
            r.params["tail"] = side == 0 ? "lower" : "upper";
            r.params["threshold"] = cut;
            r.params["I"] = info.mean;
            r.params["I_se"] = info.standard_error;
            r.params["D"] = constants.D_b;
            r.params["C"] = constants.C_b;
            r.params["slack"] = psi - rate;
            r.params["seed"] = seed;
            r.estimate = rate;
            r.standard_error = std::sqrt(rate * (1.0 - rate) / trials);
            r.upper_bound = psi;
            r.trials = setup.trials;
            r.resolution = options.resolution;
            r.clamped_fraction = clamped_fraction;
            r.verdict = recompute_verdict(r);
            reports.push_back(std::move(r));
        }
    }
    return reports;
}

double g_deviation(double c_beta, std::size_t k, std::span<const double> alpha_grid, std::uint64_t seed) {
    auto rng = substream(seed, stream::kBeta, 0);
    const SortedSignal sorted(sample_beta(SignalModel::gaussian_iid(c_beta, k), rng));
    const auto prefix = sorted.prefix_sums();
    double worst = 0.0;
    for (double alpha : alpha_grid) {
        const double partial = prefix[floor_fraction(alpha, k)] / c_beta;
        worst = std::max(worst, std::abs(partial - g_fraction(alpha)));
    }
    return worst;
}

VerificationReport g_convergence_check(double c_beta, std::size_t k, std::span<const double> alpha_grid,
                                       std::uint64_t seed) {
    if (k < 100) throw std::invalid_argument("g convergence check needs k >= 100");
    VerificationReport r;
    r.check = "gconv";
    r.params = {{"c_beta", c_beta}, {"k", k}, {"grid_points", alpha_grid.size()}, {"seed", seed}};
    r.estimate = g_deviation(c_beta, k, alpha_grid, seed);
    r.upper_bound = g_convergence_tolerance(k);
    r.trials = 1;
    r.verdict = recompute_verdict(r);
    return r;
}

double max_second_difference(const std::function<double(double)>& log_density, double lo, double hi, double step) {
    if (!(hi > lo) || !(step > 0.0)) throw std::invalid_argument("invalid second-difference grid");
    const auto points = static_cast<std::size_t>(std::floor((hi - lo) / step)) + 1;
    if (points < 3) throw std::invalid_argument("second-difference grid needs at least three points");
    std::vector<double> values(points);
    for (std::size_t i = 0; i < points; ++i) values[i] = log_density(lo + step * static_cast<double>(i));
    double worst = -kInf;
    for (std::size_t i = 1; i + 1 < points; ++i) {
        worst = std::max(worst, values[i + 1] - 2.0 * values[i] + values[i - 1]);
    }
    return worst;
}

std::vector<VerificationReport> logconcavity_check(std::span<const LogConcavityCase> battery,
                                                   const VerifyOptions& options) {
    std::vector<VerificationReport> reports(battery.size());
    parallel_for(battery.size(), options.threads, [&](std::size_t i) {
        const auto& c = battery[i];
        const ConditionalOutputLaw law{c.lambda, c.v, NoiseModel::gaussian(c.sigma * c.sigma)};
        const double mean = c.lambda + c.v;
        const double sd = std::sqrt(conditional_output_variance(c.v, c.lambda) + c.sigma * c.sigma);
        const double lo = mean - 6.0 * sd;
        const double hi = mean + 6.0 * sd;
        const double step = 1e-2 * c.sigma;
        auto& r = reports[i];
        r.check = "logconcavity";
        r.params = {{"lambda", c.lambda}, {"v", c.v}, {"sigma", c.sigma}, {"lo", lo}, {"hi", hi}, {"step", step}};
        r.estimate = max_second_difference([&](double y) { return log_f_y_given_xeq(y, law, options.density); }, lo,
                                           hi, step);
        r.upper_bound = kSecondDifferenceTolerance;
        r.trials = static_cast<std::size_t>(std::floor((hi - lo) / step)) + 1;
        r.resolution = options.resolution;
        r.verdict = recompute_verdict(r);
    });
    return reports;
}

VerificationReport bimodal_negative_control() {
    const auto component = NoiseModel::gaussian(0.25);
    auto log_mixture = [&](double y) {
        const double a = component.log_pdf(y + 2.0);
        const double b = component.log_pdf(y - 2.0);
        const double m = std::max(a, b);
        return m + std::log(0.5 * std::exp(a - m) + 0.5 * std::exp(b - m));
    };
    VerificationReport r;
    r.check = "logconcavity-negative-control";
    r.params = {{"mixture", "0.5 N(-2, 0.25) + 0.5 N(2, 0.25)"}, {"lo", -4.0}, {"hi", 4.0}, {"step", 0.005}};
    r.estimate = max_second_difference(log_mixture, -4.0, 4.0, 0.005);
    r.upper_bound = kSecondDifferenceTolerance;
    r.trials = 1601;
    r.verdict = recompute_verdict(r);
    return r;
}

std::vector<std::pair<PartitionPowers, double>> sandwich_battery() {
    std::vector<std::pair<PartitionPowers, double>> out;
    for (double v_dif : {0.5, 1.0, 2.0})
        for (double v_eq : {0.0, 1.0})
            for (double sigma : {0.5, 1.0}) out.push_back({PartitionPowers{v_dif, v_eq, 0}, sigma});
    return out;
}

std::vector<LogConcavityCase> logconcavity_battery() {
    std::vector<LogConcavityCase> out;
    for (double lambda : {0.0, 1.0, 4.0})
        for (double v : {0.5, 2.0})
            for (double sigma : {0.5, 1.0}) out.push_back({lambda, v, sigma});
    return out;
}

std::vector<ConcentrationSetup> concentration_battery(std::size_t trials) {
    std::vector<ConcentrationSetup> out;
    ConcentrationSetup base{1.0, PartitionPowers{1.0, 0.0, 0}, NoiseModel::gaussian(1.0)};
    base.trials = trials;
    out.push_back(base);
    ConcentrationSetup mixed{2.0, PartitionPowers{1.0, 1.0, 0}, NoiseModel::gaussian(1.0)};
    mixed.trials = trials;
    out.push_back(mixed);
    return out;
}

std::vector<double> default_alpha_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("alpha grid step must lie in (0, 1]");
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::llround(1.0 / step));
    for (std::size_t i = 0; i <= count; ++i) grid.push_back(std::min(1.0, step * static_cast<double>(i)));
    return grid;
}

}  // namespace phaselim
