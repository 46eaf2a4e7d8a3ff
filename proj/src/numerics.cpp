#include "phaselim/numerics.hpp"

#include "phaselim/errors.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace phaselim {

GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                double x_tol, int max_iter) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > x_tol; ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // The endpoints are never evaluated by the interior recursion; a maximum
    // sitting on the boundary needs them.
    GoldenResult best = fc >= fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
    for (double x : {lo, hi}) {
        const double fx = f(x);
        if (fx > best.value) best = {x, fx};
    }
    return best;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& options) {
    if (!(b > a)) return 0.0;
    double error = 0.0;
    double l1 = 0.0;
    // Map onto [0, 1]; boost's error estimate degrades on intervals that are
    // tiny in absolute terms.
    const double width = b - a;
    const double unit = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double t) { return f(a + width * t); }, 0.0, 1.0, options.max_depth, options.rel_tol, &error, &l1);
    const double value = unit * width;
    if (!std::isfinite(value) || error > std::sqrt(options.rel_tol) * std::max(l1, 1e-300)) {
        throw NumericFailure("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]: estimate " + std::to_string(value) + ", error " +
                             std::to_string(error));
    }
    return value;
}

void KahanSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double compensated_sum(std::span<const double> values) {
    KahanSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

MeanEstimate batch_mean(std::span<const double> values, std::size_t batches) {
    const std::size_t n = values.size();
    if (n == 0) return {0.0, 0.0};
    const double mean = compensated_sum(values) / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    if (n < 2 * batches) {
        KahanSum ss;
        for (double v : values) ss.add((v - mean) * (v - mean));
        return {mean, std::sqrt(ss.value() / static_cast<double>(n - 1) / static_cast<double>(n))};
    }
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t begin = b * n / batches;
        const std::size_t end = (b + 1) * n / batches;
        means[b] = compensated_sum(values.subspan(begin, end - begin)) / static_cast<double>(end - begin);
    }
    KahanSum ss;
    for (double m : means) ss.add((m - mean) * (m - mean));
    const double var_of_batch_mean = ss.value() / static_cast<double>(batches - 1);
    return {mean, std::sqrt(var_of_batch_mean / static_cast<double>(batches))};
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    constexpr std::size_t chunk = 64;
    auto worker = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const std::size_t end = std::min(count, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace phaselim
