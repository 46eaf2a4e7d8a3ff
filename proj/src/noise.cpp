#include "phaselim/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phaselim {

NoiseModel::NoiseModel(Kind kind, double variance)
    : kind_(kind), variance_(variance), sigma_(std::sqrt(variance)) {}

NoiseModel NoiseModel::gaussian(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw std::invalid_argument("noise variance must be positive and finite");
    }
    return NoiseModel(Kind::Gaussian, variance);
}

double NoiseModel::log_pdf(double z) const {
    return -0.5 * z * z / variance_ - 0.5 * std::log(2.0 * std::numbers::pi * variance_);
}

double NoiseModel::pdf(double z) const { return std::exp(log_pdf(z)); }

double NoiseModel::entropy() const {
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * variance_);
}

double NoiseModel::entropy_power() const { return 2.0 * std::numbers::pi * std::numbers::e * variance_; }

double NoiseModel::peak_density() const { return 1.0 / std::sqrt(2.0 * std::numbers::pi * variance_); }

double NoiseModel::sample(Rng& rng) const { return sigma_ * rng.normal(); }

}  // namespace phaselim
