#include "phaselim/simulator.hpp"

#include "phaselim/errors.hpp"
#include "phaselim/numerics.hpp"
#include "phaselim/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace phaselim {

std::string_view to_string(DecoderKind kind) { return kind == DecoderKind::FlatMl ? "flat-ml" : "mc-marginal"; }

DecoderKind parse_decoder(std::string_view text) {
    if (text == "flat-ml") return DecoderKind::FlatMl;
    if (text == "mc-marginal") return DecoderKind::McMarginal;
    throw std::invalid_argument("unknown decoder '" + std::string(text) + "'");
}

double binomial_coefficient(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double out = 1.0;
    for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(out);
}

void validate(const SimConfig& c) {
    if (c.k == 0 || c.k > c.p) throw std::invalid_argument("need 1 <= k <= p");
    if (c.signal.k() != c.k) throw std::invalid_argument("signal model k does not match the configuration");
    if (binomial_coefficient(c.p, c.k) > kMaxSupports) {
        throw std::invalid_argument("C(p, k) exceeds the exhaustive-search limit of 10000 supports");
    }
    if (!(c.alpha_star > 0.0 && c.alpha_star < 1.0)) throw std::invalid_argument("alpha_star must lie in (0, 1)");
    if (floor_fraction(c.alpha_star, c.k) < 1) throw std::invalid_argument("need floor(alpha_star * k) >= 1");
    if (c.trials == 0) throw std::invalid_argument("need at least one trial per n");
    if (c.n_grid.empty()) throw std::invalid_argument("n grid is empty");
    if (std::holds_alternative<DiscreteGeneral>(c.signal.law()) && c.signal.distinct_values() > 1) {
        throw Unsupported("decoding a permuted vector with more than one distinct value is not supported");
    }
    const bool gaussian = std::holds_alternative<GaussianIid>(c.signal.law());
    if (c.decoder == DecoderKind::FlatMl && gaussian) {
        throw std::invalid_argument("flat-ml decoder needs a flat discrete signal");
    }
    if (c.decoder == DecoderKind::McMarginal) {
        if (!gaussian) throw std::invalid_argument("mc-marginal decoder needs a Gaussian signal");
        if (c.mc_samples == 0) throw std::invalid_argument("mc-marginal decoder needs at least one sample");
    }
}

std::vector<std::vector<std::size_t>> all_supports(std::size_t p, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    if (k == 0 || k > p) return out;
    std::vector<std::size_t> current(k);
    for (std::size_t i = 0; i < k; ++i) current[i] = i;
    while (true) {
        out.push_back(current);
        std::size_t i = k;
        while (i > 0 && current[i - 1] == p - k + i - 1) --i;
        if (i == 0) break;
        ++current[i - 1];
        for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
    }
    return out;
}

namespace {

double log_likelihood(const ProblemInstance& instance, std::span<const std::size_t> support,
                      std::span<const Complex> beta, const NoiseModel& noise) {
    KahanSum sum;
    for (std::size_t i = 0; i < instance.n; ++i) {
        const auto row = instance.x.row(i);
        Complex acc(0.0, 0.0);
        for (std::size_t j = 0; j < support.size(); ++j) acc += std::conj(row[support[j]]) * beta[j];
        sum.add(noise.log_pdf(instance.y[i] - std::norm(acc)));
    }
    return sum.value();
}

}  // namespace

SupportSet decode(const ProblemInstance& instance, const SimConfig& config, std::uint64_t decoder_seed) {
    validate(config);
    if (instance.p != config.p || instance.k != config.k) {
        throw std::invalid_argument("instance dimensions do not match the configuration");
    }
    const auto candidates = all_supports(config.p, config.k);

    std::vector<std::vector<Complex>> draws;
    if (config.decoder == DecoderKind::FlatMl) {
        draws.push_back(config.signal.fixed_vector());
    } else {
        auto rng = substream(decoder_seed, stream::kDecoder, 0);
        for (std::size_t m = 0; m < config.mc_samples; ++m) draws.push_back(sample_beta(config.signal, rng));
    }
    const double log_count = std::log(static_cast<double>(draws.size()));

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(draws.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        for (std::size_t m = 0; m < draws.size(); ++m) {
            terms[m] = log_likelihood(instance, candidates[c], draws[m], config.noise);
        }
        const double top = *std::max_element(terms.begin(), terms.end());
        double score = top;
        if (draws.size() > 1 && std::isfinite(top)) {
            KahanSum sum;
            for (double t : terms) sum.add(std::exp(t - top));
            score = top + std::log(sum.value()) - log_count;
        }
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return SupportSet(config.p, candidates[best]);
}

bool error_event(const SupportSet& truth, const SupportSet& estimate, std::size_t k, double alpha_star) {
    if (truth.k() != k || estimate.k() != k) throw std::invalid_argument("supports must both have k elements");
    std::size_t missed = 0;
    for (auto i : truth.indices()) missed += estimate.contains(i) ? 0 : 1;
    return missed >= floor_fraction(alpha_star, k);
}

ErrorCurve error_curve(const SimConfig& config) {
    validate(config);
    ErrorCurve curve;
    for (std::size_t n : config.n_grid) {
        const std::uint64_t n_seed = substream(config.master_seed, stream::kTrial, n)();
        std::vector<char> errors(config.trials, 0);
        parallel_for(config.trials, config.threads, [&](std::size_t t) {
            const std::uint64_t seed = substream(n_seed, stream::kTrial, t)();
            const auto instance = generate_instance(config.p, n, config.signal, config.noise, seed);
            const auto estimate = decode(instance, config, seed);
            errors[t] = error_event(instance.support, estimate, config.k, config.alpha_star) ? 1 : 0;
        });
        const double count = static_cast<double>(std::count(errors.begin(), errors.end(), 1));
        const double trials = static_cast<double>(config.trials);
        const double pe = count / trials;
        curve.push_back({n, pe, std::sqrt(pe * (1.0 - pe) / trials), config.trials});
    }
    return curve;
}

void write_error_curve_csv(std::ostream& out, std::span<const ErrorPoint> curve, std::span<const std::string> comments) {
    out << "n,pe,se,trials\n";
    char line[160];
    for (const auto& p : curve) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%zu\n", p.n, p.pe, p.se, p.trials);
        out << line;
    }
    for (const auto& c : comments) out << "# " << c << '\n';
}

std::vector<double> isotonic_nonincreasing(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) throw std::invalid_argument("values and weights differ in length");
    struct Block {
        double mean;
        double weight;
        std::size_t size;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
            const Block last = blocks.back();
            blocks.pop_back();
            auto& prev = blocks.back();
            const double w = prev.weight + last.weight;
            prev.mean = (prev.mean * prev.weight + last.mean * last.weight) / w;
            prev.weight = w;
            prev.size += last.size;
        }
    }
    std::vector<double> fit;
    fit.reserve(values.size());
    for (const auto& b : blocks) fit.insert(fit.end(), b.size, b.mean);
    return fit;
}

double isotonic_residual(std::span<const ErrorPoint> curve) {
    std::vector<double> values, weights;
    for (const auto& p : curve) {
        values.push_back(p.pe);
        weights.push_back(static_cast<double>(p.trials));
    }
    const auto fit = isotonic_nonincreasing(values, weights);
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) worst = std::max(worst, std::abs(values[i] - fit[i]));
    return worst;
}

double pooled_standard_error(std::span<const ErrorPoint> curve) {
    double errors = 0.0, trials = 0.0;
    for (const auto& p : curve) {
        errors += p.pe * static_cast<double>(p.trials);
        trials += static_cast<double>(p.trials);
    }
    if (trials == 0.0) return 0.0;
    const double mean = errors / trials;
    const double per_point = trials / static_cast<double>(curve.size());
    return std::sqrt(mean * (1.0 - mean) / per_point);
}

namespace {

std::size_t parse_size(std::string_view text) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected a non-negative integer, got '" + std::string(text) + "'");
    return value;
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

}  // namespace

std::vector<std::size_t> parse_n_grid(std::string_view text) {
    std::vector<std::size_t> grid;
    const std::string t = trim(text);
    if (t.find(':') != std::string::npos) {
        std::vector<std::size_t> parts;
        std::stringstream ss(t);
        std::string piece;
        while (std::getline(ss, piece, ':')) parts.push_back(parse_size(trim(piece)));
        if (parts.size() != 3 || parts[2] == 0 || parts[1] < parts[0]) {
            throw std::invalid_argument("n grid range must be start:stop:step with step > 0");
        }
        for (std::size_t n = parts[0]; n <= parts[1]; n += parts[2]) grid.push_back(n);
        return grid;
    }
    std::stringstream ss(t);
    std::string piece;
    while (std::getline(ss, piece, ',')) grid.push_back(parse_size(trim(piece)));
    if (grid.empty()) throw std::invalid_argument("n grid is empty");
    return grid;
}

SimConfig parse_sim_config(std::string_view text) {
    std::map<std::string, std::string> kv;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        const auto j = nlohmann::json::parse(body);
        for (const auto& [key, value] : j.items()) {
            if (value.is_string()) {
                kv[key] = value.get<std::string>();
            } else if (value.is_array()) {
                std::string joined;
                for (const auto& item : value) joined += (joined.empty() ? "" : ",") + item.dump();
                kv[key] = joined;
            } else {
                kv[key] = value.dump();
            }
        }
    } else {
        std::stringstream ss(body);
        std::string line;
        while (std::getline(ss, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
            kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }

    SimConfig c;
    std::string signal = "flat";
    double c_beta = 1.0;
    double sigma2 = 1e-6;
    for (const auto& [key, value] : kv) {
        if (key == "p") c.p = parse_size(value);
        else if (key == "k") c.k = parse_size(value);
        else if (key == "n_grid") c.n_grid = parse_n_grid(value);
        else if (key == "alpha_star") c.alpha_star = std::stod(value);
        else if (key == "signal") signal = value;
        else if (key == "c_beta") c_beta = std::stod(value);
        else if (key == "sigma2") sigma2 = std::stod(value);
        else if (key == "trials") c.trials = parse_size(value);
        else if (key == "decoder") c.decoder = parse_decoder(value);
        else if (key == "mc_samples") c.mc_samples = parse_size(value);
        else if (key == "seed") c.master_seed = std::stoull(value);
        else if (key == "threads") c.threads = static_cast<unsigned>(parse_size(value));
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
    if (signal == "flat") c.signal = SignalModel::discrete_flat(c_beta, c.k);
    else if (signal == "gaussian") c.signal = SignalModel::gaussian_iid(c_beta, c.k);
    else throw std::invalid_argument("unknown signal '" + signal + "'");
    c.noise = NoiseModel::gaussian(sigma2);
    if (!kv.contains("decoder") && signal == "gaussian") c.decoder = DecoderKind::McMarginal;
    return c;
}

}  // namespace phaselim
