#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace phaselim {

struct GoldenResult {
    double x;
    double value;
};

// Maximizes a unimodal function on [lo, hi] by golden-section search.
// Stops when the bracket is narrower than x_tol.
GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                double x_tol, int max_iter = 200);

struct QuadratureOptions {
    double rel_tol = 1e-11;
    unsigned max_depth = 18;
};

// Adaptive Gauss-Kronrod (7/15) on a finite interval. Throws NumericFailure
// when the error estimate stays above sqrt(rel_tol) relative to the L1 norm.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options = {});

// Neumaier-compensated running sum.
class KahanSum {
public:
    void add(double x);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values);

struct MeanEstimate {
    double mean;
    double standard_error;
};

// Mean with the standard error computed from `batches` contiguous batch
// means. Falls back to the iid formula when there are fewer samples than
// batches.
MeanEstimate batch_mean(std::span<const double> values, std::size_t batches = 100);

// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be
// written to per-index slots; the schedule never affects them.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

// 0 means "use hardware concurrency".
unsigned resolve_threads(unsigned requested);

}  // namespace phaselim
