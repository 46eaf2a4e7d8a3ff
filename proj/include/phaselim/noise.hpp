#pragma once

#include "phaselim/rng.hpp"

namespace phaselim {

// Additive measurement noise Z with a log-concave density. Only the Gaussian
// law is implemented; the kind tag is where further log-concave laws plug in.
class NoiseModel {
public:
    enum class Kind { Gaussian };

    static NoiseModel gaussian(double variance);

    Kind kind() const { return kind_; }
    double variance() const { return variance_; }
    double sigma() const { return sigma_; }

    double pdf(double z) const;
    double log_pdf(double z) const;
    // Differential entropy h(Z) in nats.
    double entropy() const;
    // exp(2 h(Z)).
    double entropy_power() const;
    // ||f_Z||_inf.
    double peak_density() const;
    double sample(Rng& rng) const;
    // Width used to size quadrature windows.
    double scale() const { return sigma_; }

private:
    NoiseModel(Kind kind, double variance);

    Kind kind_;
    double variance_;
    double sigma_;
};

}  // namespace phaselim
