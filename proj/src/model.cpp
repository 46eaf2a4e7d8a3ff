#include "phaselim/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace phaselim {

std::size_t floor_fraction(double alpha, std::size_t k) {
    const double x = std::floor(alpha * static_cast<double>(k) + 1e-9);
    return x <= 0.0 ? 0 : static_cast<std::size_t>(x);
}

SupportSet::SupportSet(std::size_t p, std::vector<std::size_t> indices) : p_(p), indices_(std::move(indices)) {
    if (indices_.empty()) throw std::invalid_argument("support must contain at least one index");
    if (indices_.size() > p_) throw std::invalid_argument("support larger than the ambient dimension");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i] >= p_) throw std::invalid_argument("support index out of range");
        if (i > 0 && indices_[i] <= indices_[i - 1]) {
            throw std::invalid_argument("support indices must be strictly increasing");
        }
    }
}

bool SupportSet::contains(std::size_t index) const {
    return std::binary_search(indices_.begin(), indices_.end(), index);
}

SignalModel SignalModel::discrete_general(std::vector<Complex> values) {
    if (values.empty()) throw std::invalid_argument("discrete signal needs at least one entry");
    for (const auto& b : values) {
        if (!std::isfinite(b.real()) || !std::isfinite(b.imag())) {
            throw std::invalid_argument("discrete signal entries must be finite");
        }
    }
    return SignalModel(DiscreteGeneral{std::move(values)});
}

SignalModel SignalModel::discrete_flat(double c_beta, std::size_t k) {
    if (!(c_beta > 0.0) || !std::isfinite(c_beta)) throw std::invalid_argument("c_beta must be positive");
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    return SignalModel(DiscreteFlat{c_beta, k});
}

SignalModel SignalModel::gaussian_iid(double c_beta, std::size_t k) {
    if (!(c_beta > 0.0) || !std::isfinite(c_beta)) throw std::invalid_argument("c_beta must be positive");
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    return SignalModel(GaussianIid{c_beta, k});
}

std::size_t SignalModel::k() const {
    return std::visit(
        [](const auto& law) -> std::size_t {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, DiscreteGeneral>) {
                return law.values.size();
            } else {
                return law.k;
            }
        },
        law_);
}

double SignalModel::c_beta() const {
    if (const auto* general = std::get_if<DiscreteGeneral>(&law_)) {
        double total = 0.0;
        for (const auto& b : general->values) total += std::norm(b);
        return total;
    }
    if (const auto* flat = std::get_if<DiscreteFlat>(&law_)) return flat->c_beta;
    return std::get<GaussianIid>(law_).c_beta;
}

double SignalModel::entry_variance() const { return c_beta() / static_cast<double>(k()); }

std::vector<Complex> SignalModel::fixed_vector() const {
    if (const auto* general = std::get_if<DiscreteGeneral>(&law_)) return general->values;
    if (const auto* flat = std::get_if<DiscreteFlat>(&law_)) {
        return std::vector<Complex>(flat->k, Complex(std::sqrt(flat->c_beta / static_cast<double>(flat->k)), 0.0));
    }
    throw std::invalid_argument("Gaussian signal law has no fixed vector");
}

std::size_t SignalModel::distinct_values() const {
    if (std::holds_alternative<DiscreteFlat>(law_)) return 1;
    const auto values = fixed_vector();
    std::set<std::pair<double, double>> seen;
    for (const auto& b : values) seen.emplace(b.real(), b.imag());
    return seen.size();
}

SortedSignal::SortedSignal(std::span<const Complex> values) {
    sq_magnitudes_.reserve(values.size());
    for (const auto& b : values) sq_magnitudes_.push_back(std::norm(b));
    std::sort(sq_magnitudes_.begin(), sq_magnitudes_.end());
    prefix_sums_.assign(sq_magnitudes_.size() + 1, 0.0);
    for (std::size_t i = 0; i < sq_magnitudes_.size(); ++i) {
        prefix_sums_[i + 1] = prefix_sums_[i] + sq_magnitudes_[i];
    }
}

PartitionPowers partition_powers(const SortedSignal& sorted, double alpha, PartitionMode mode) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    const std::size_t k = sorted.k();
    const auto prefix = sorted.prefix_sums();
    PartitionPowers out;
    out.ell = std::min(floor_fraction(alpha, k), k);
    out.v_dif = prefix[out.ell];
    if (mode == PartitionMode::Asymptotic && out.ell < k) {
        const double excess = alpha * static_cast<double>(k) - static_cast<double>(out.ell);
        if (excess > 0.0) out.v_dif += excess * sorted.sq_magnitudes()[out.ell];
    }
    out.v_eq = sorted.total() - out.v_dif;
    if (out.v_eq < 0.0) out.v_eq = 0.0;
    return out;
}

ComplexMatrix ComplexMatrix::select_columns(std::span<const std::size_t> columns) const {
    ComplexMatrix out(rows, columns.size());
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) out(i, j) = (*this)(i, columns[j]);
    }
    return out;
}

Complex inner(std::span<const Complex> x, std::span<const Complex> b) {
    if (x.size() != b.size()) throw std::invalid_argument("inner product of vectors with different lengths");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * b[i];
    return acc;
}

SupportSet sample_support(std::size_t p, std::size_t k, Rng& rng) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (k > p) throw std::invalid_argument("k must not exceed p");
    // Selection sampling: index i is kept with probability (needed)/(remaining).
    std::vector<std::size_t> indices;
    indices.reserve(k);
    for (std::size_t i = 0; i < p && indices.size() < k; ++i) {
        const std::size_t remaining = p - i;
        const std::size_t needed = k - indices.size();
        if (rng.uniform_index(remaining) < needed) indices.push_back(i);
    }
    return SupportSet(p, std::move(indices));
}

std::vector<Complex> sample_beta(const SignalModel& model, Rng& rng) {
    if (const auto* gaussian = std::get_if<GaussianIid>(&model.law())) {
        const double variance = gaussian->c_beta / static_cast<double>(gaussian->k);
        std::vector<Complex> beta(gaussian->k);
        for (auto& b : beta) b = rng.complex_normal(variance);
        return beta;
    }
    auto beta = model.fixed_vector();
    if (std::holds_alternative<DiscreteGeneral>(model.law())) {
        for (std::size_t i = beta.size(); i > 1; --i) {
            std::swap(beta[i - 1], beta[rng.uniform_index(i)]);
        }
    }
    return beta;
}

ComplexMatrix sample_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    ComplexMatrix x(rows, cols);
    for (auto& entry : x.data) entry = rng.complex_normal(1.0);
    return x;
}

Observation observe_detailed(const ComplexMatrix& x_s, std::span<const Complex> beta_s, const NoiseModel& noise,
                             Rng& rng) {
    if (x_s.cols != beta_s.size()) {
        throw std::invalid_argument("measurement matrix has " + std::to_string(x_s.cols) + " columns but beta has " +
                                    std::to_string(beta_s.size()) + " entries");
    }
    Observation obs;
    obs.y.resize(x_s.rows);
    obs.z.resize(x_s.rows);
    for (std::size_t i = 0; i < x_s.rows; ++i) {
        obs.z[i] = noise.sample(rng);
        obs.y[i] = std::norm(inner(x_s.row(i), beta_s)) + obs.z[i];
    }
    return obs;
}

std::vector<double> observe(const ComplexMatrix& x_s, std::span<const Complex> beta_s, const NoiseModel& noise,
                            Rng& rng) {
    return observe_detailed(x_s, beta_s, noise, rng).y;
}

std::vector<Complex> ProblemInstance::beta_on_support() const {
    std::vector<Complex> out;
    out.reserve(k);
    for (std::size_t index : support.indices()) out.push_back(beta[index]);
    return out;
}

ProblemInstance generate_instance(std::size_t p, std::size_t n, const SignalModel& signal, const NoiseModel& noise,
                                  std::uint64_t seed) {
    ProblemInstance inst;
    inst.p = p;
    inst.k = signal.k();
    inst.n = n;
    inst.seed = seed;
    auto support_rng = substream(seed, stream::kSupport, 0);
    inst.support = sample_support(p, inst.k, support_rng);
    auto beta_rng = substream(seed, stream::kBeta, 0);
    const auto beta_s = sample_beta(signal, beta_rng);
    inst.beta.assign(p, Complex{0.0, 0.0});
    for (std::size_t j = 0; j < inst.k; ++j) inst.beta[inst.support.indices()[j]] = beta_s[j];
    auto matrix_rng = substream(seed, stream::kMatrix, 0);
    inst.x = sample_matrix(n, p, matrix_rng);
    auto noise_rng = substream(seed, stream::kNoise, 0);
    auto obs = observe_detailed(inst.x.select_columns(inst.support.indices()), beta_s, noise, noise_rng);
    inst.y = std::move(obs.y);
    inst.z = std::move(obs.z);
    return inst;
}

nlohmann::json instance_to_json(const ProblemInstance& instance) {
    nlohmann::json beta_re = nlohmann::json::array();
    nlohmann::json beta_im = nlohmann::json::array();
    for (const auto& b : instance.beta) {
        beta_re.push_back(b.real());
        beta_im.push_back(b.imag());
    }
    return {
        {"p", instance.p},
        {"k", instance.k},
        {"n", instance.n},
        {"seed", instance.seed},
        {"support", std::vector<std::size_t>(instance.support.indices().begin(), instance.support.indices().end())},
        {"beta_re", beta_re},
        {"beta_im", beta_im},
        {"y", instance.y},
    };
}

ProblemInstance replay_instance(const nlohmann::json& record, const SignalModel& signal, const NoiseModel& noise) {
    const auto p = record.at("p").get<std::size_t>();
    const auto k = record.at("k").get<std::size_t>();
    const auto n = record.at("n").get<std::size_t>();
    const auto seed = record.at("seed").get<std::uint64_t>();
    if (k != signal.k()) throw std::invalid_argument("record k does not match the signal model");
    auto inst = generate_instance(p, n, signal, noise, seed);
    const auto support = record.at("support").get<std::vector<std::size_t>>();
    const auto y = record.at("y").get<std::vector<double>>();
    const auto beta_re = record.at("beta_re").get<std::vector<double>>();
    const auto beta_im = record.at("beta_im").get<std::vector<double>>();
    bool same = std::equal(support.begin(), support.end(), inst.support.indices().begin(), inst.support.indices().end()) &&
                y == inst.y && beta_re.size() == p && beta_im.size() == p;
    for (std::size_t j = 0; same && j < p; ++j) {
        same = inst.beta[j] == Complex(beta_re[j], beta_im[j]);
    }
    if (!same) throw std::invalid_argument("instance record does not match its regenerated observations");
    return inst;
}

}  // namespace phaselim
