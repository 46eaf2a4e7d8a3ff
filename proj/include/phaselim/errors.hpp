#pragma once

#include <stdexcept>
#include <string>

namespace phaselim {

// Quadrature or root search failed to reach its tolerance.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every candidate α gives a zero mutual-information denominator.
class InfeasibleThreshold : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A model/decoder combination that is typed but not implemented.
class Unsupported : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace phaselim
