#pragma once

#include "phaselim/noise.hpp"
#include "phaselim/rng.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <span>
#include <variant>
#include <vector>

namespace phaselim {

using Complex = std::complex<double>;

// ⌊alpha·k⌋ with a 1e-9 guard so that decimal inputs such as 0.29·100 land on
// the intended integer.
std::size_t floor_fraction(double alpha, std::size_t k);

// A k-subset of {0, ..., p-1}, stored strictly increasing.
class SupportSet {
public:
    SupportSet(std::size_t p, std::vector<std::size_t> indices);

    std::size_t p() const { return p_; }
    std::size_t k() const { return indices_.size(); }
    std::span<const std::size_t> indices() const { return indices_; }
    bool contains(std::size_t index) const;

    friend bool operator==(const SupportSet&, const SupportSet&) = default;

private:
    std::size_t p_;
    std::vector<std::size_t> indices_;
};

// Law of the non-zero entries β_s.
struct DiscreteGeneral {
    std::vector<Complex> values;  // β_s is a uniform permutation of these
};
struct DiscreteFlat {
    double c_beta;  // every entry equals sqrt(c_beta / k)
    std::size_t k;
};
struct GaussianIid {
    double c_beta;  // entries iid CN(0, c_beta / k)
    std::size_t k;
};

class SignalModel {
public:
    using Law = std::variant<DiscreteGeneral, DiscreteFlat, GaussianIid>;

    static SignalModel discrete_general(std::vector<Complex> values);
    static SignalModel discrete_flat(double c_beta, std::size_t k);
    static SignalModel gaussian_iid(double c_beta, std::size_t k);

    const Law& law() const { return law_; }
    std::size_t k() const;
    bool is_discrete() const { return !std::holds_alternative<GaussianIid>(law_); }

    // c_beta for flat/Gaussian laws; ||b||² for a general discrete vector.
    double c_beta() const;
    // σ_β² = c_beta / k (Gaussian law).
    double entry_variance() const;
    // The fixed vector of a discrete law (flat entries expanded).
    std::vector<Complex> fixed_vector() const;
    // Number of distinct entries m_β of a discrete law.
    std::size_t distinct_values() const;

private:
    explicit SignalModel(Law law) : law_(std::move(law)) {}
    Law law_;
};

// Squared magnitudes sorted ascending with left-to-right prefix sums.
class SortedSignal {
public:
    explicit SortedSignal(std::span<const Complex> values);

    std::size_t k() const { return sq_magnitudes_.size(); }
    std::span<const double> sq_magnitudes() const { return sq_magnitudes_; }
    // prefix_sums()[i] = Σ_{j<i} |b'_j|², size k+1.
    std::span<const double> prefix_sums() const { return prefix_sums_; }
    double total() const { return prefix_sums_.back(); }

private:
    std::vector<double> sq_magnitudes_;
    std::vector<double> prefix_sums_;
};

struct PartitionPowers {
    double v_dif = 0.0;
    double v_eq = 0.0;
    std::size_t ell = 0;  // |s_dif|
};

enum class PartitionMode { FloorExact, Asymptotic };

// s_dif holds the ⌊αk⌋ smallest-magnitude entries. Asymptotic mode places
// mass αk by interpolating into the next sorted entry.
PartitionPowers partition_powers(const SortedSignal& sorted, double alpha,
                                 PartitionMode mode = PartitionMode::FloorExact);

// Dense row-major complex matrix.
struct ComplexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Complex> data;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
    Complex& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<const Complex> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    // Columns listed in `columns`, in that order.
    ComplexMatrix select_columns(std::span<const std::size_t> columns) const;
};

// ⟨x, b⟩ = Σ conj(x_i) b_i. Only |⟨x, b⟩|² enters the model, so the
// conjugated side does not matter.
Complex inner(std::span<const Complex> x, std::span<const Complex> b);

SupportSet sample_support(std::size_t p, std::size_t k, Rng& rng);
std::vector<Complex> sample_beta(const SignalModel& model, Rng& rng);
ComplexMatrix sample_matrix(std::size_t rows, std::size_t cols, Rng& rng);

struct Observation {
    std::vector<double> y;
    std::vector<double> z;  // the noise draw behind each y
};

// Y[i] = |⟨x_s^(i), β_s⟩|² + Z[i].
Observation observe_detailed(const ComplexMatrix& x_s, std::span<const Complex> beta_s, const NoiseModel& noise,
                             Rng& rng);
std::vector<double> observe(const ComplexMatrix& x_s, std::span<const Complex> beta_s, const NoiseModel& noise,
                            Rng& rng);

struct ProblemInstance {
    std::size_t p = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    SupportSet support{1, {0}};
    std::vector<Complex> beta;  // length p, zero off the support
    ComplexMatrix x;            // n × p
    std::vector<double> y;
    std::vector<double> z;

    std::vector<Complex> beta_on_support() const;
};

// Deterministic in `seed`: support, β, X and Z come from separate substreams.
ProblemInstance generate_instance(std::size_t p, std::size_t n, const SignalModel& signal, const NoiseModel& noise,
                                  std::uint64_t seed);

// {p,k,n,seed,support,beta_re,beta_im,y}; X is regenerated from the seed.
nlohmann::json instance_to_json(const ProblemInstance& instance);
// Rebuilds the instance from a record. Throws std::invalid_argument when the
// regenerated observations disagree with the stored ones.
ProblemInstance replay_instance(const nlohmann::json& record, const SignalModel& signal, const NoiseModel& noise);

}  // namespace phaselim
