#include <doctest.h>

#include "phaselim/model.hpp"
#include "phaselim/numerics.hpp"
#include "phaselim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

using namespace phaselim;

namespace {

// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

}  // namespace

TEST_CASE("floor_fraction tolerates representation error") {
    CHECK(floor_fraction(0.1, 10) == 1);
    CHECK(floor_fraction(0.3, 10) == 3);
    CHECK(floor_fraction(0.7, 10) == 7);
    CHECK(floor_fraction(0.5, 3) == 1);
    CHECK(floor_fraction(1.0, 7) == 7);
    CHECK(floor_fraction(0.0, 7) == 0);
}

TEST_CASE("SupportSet validates its indices") {
    CHECK_THROWS_AS(SupportSet(5, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(SupportSet(5, {5}), std::invalid_argument);
    CHECK_THROWS_AS(SupportSet(5, {3, 0}), std::invalid_argument);
    const SupportSet s(5, {0, 3});
    CHECK(s.k() == 2);
    CHECK(s.contains(0));
    CHECK(s.contains(3));
    CHECK_FALSE(s.contains(1));
}

TEST_CASE("inner product conjugates the measurement row") {
    const std::vector<Complex> x{{0.0, 1.0}};
    const std::vector<Complex> b{{1.0, 0.0}};
    const Complex v = inner(x, b);
    CHECK(v.real() == doctest::Approx(0.0));
    CHECK(v.imag() == doctest::Approx(-1.0));
}

TEST_CASE("substreams are deterministic and distinct") {
    auto a = substream(7, stream::kNoise, 3);
    auto b = substream(7, stream::kNoise, 3);
    auto c = substream(7, stream::kNoise, 4);
    auto d = substream(7, stream::kBeta, 3);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
}

TEST_CASE("uniform_index is unbiased") {
    Rng rng(11);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) ++counts[rng.uniform_index(7)];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
    CHECK(chi2 < 22.46);  // χ²_6 at 0.999
}

TEST_CASE("sample_support is uniform over k-subsets") {
    Rng rng(2024);
    std::map<std::vector<std::size_t>, int> counts;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        const auto s = sample_support(5, 2, rng);
        const auto idx = s.indices();
        counts[std::vector<std::size_t>(idx.begin(), idx.end())]++;
    }
    REQUIRE(counts.size() == 10);
    double chi2 = 0.0;
    for (const auto& [key, c] : counts) chi2 += (c - 2000.0) * (c - 2000.0) / 2000.0;
    CHECK(chi2 < 27.88);  // χ²_9 at 0.999
    CHECK_THROWS(sample_support(3, 4, rng));
    CHECK_THROWS(sample_support(3, 0, rng));
}

TEST_CASE("complex normal has variance one half per component") {
    Rng rng(5);
    const int n = 200000;
    double re2 = 0.0, im2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = rng.complex_normal();
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
        cross += z.real() * z.imag();
    }
    CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(im2 / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(cross / n) < 0.005);
}

TEST_CASE("signal laws") {
    Rng rng(9);
    const auto flat = SignalModel::discrete_flat(2.0, 4);
    for (const auto& b : sample_beta(flat, rng)) CHECK(std::norm(b) == doctest::Approx(0.5));
    CHECK(flat.c_beta() == 2.0);
    CHECK(flat.distinct_values() == 1);

    const auto general = SignalModel::discrete_general({{1.0, 0.0}, {0.0, 2.0}, {3.0, 0.0}});
    CHECK(general.c_beta() == doctest::Approx(14.0));
    CHECK(general.distinct_values() == 3);
    std::vector<double> mags;
    for (const auto& b : sample_beta(general, rng)) mags.push_back(std::norm(b));
    std::sort(mags.begin(), mags.end());
    CHECK(mags == std::vector<double>{1.0, 4.0, 9.0});

    const auto gauss = SignalModel::gaussian_iid(3.0, 10);
    CHECK_FALSE(gauss.is_discrete());
    double power = 0.0;
    const int reps = 4000;
    for (int r = 0; r < reps; ++r)
        for (const auto& b : sample_beta(gauss, rng)) power += std::norm(b);
    CHECK(power / reps == doctest::Approx(3.0).epsilon(0.02));

    CHECK_THROWS(SignalModel::discrete_flat(-1.0, 3));
    CHECK_THROWS(SignalModel::gaussian_iid(1.0, 0));
}

TEST_CASE("partition powers") {
    const std::vector<Complex> b{{2.0, 0.0}, {1.0, 0.0}, {0.0, 3.0}, {1.0, 1.0}};
    const SortedSignal sorted(b);
    CHECK(sorted.total() == doctest::Approx(16.0));
    const auto half = partition_powers(sorted, 0.5);
    CHECK(half.ell == 2);
    CHECK(half.v_dif == doctest::Approx(3.0));
    CHECK(half.v_eq == doctest::Approx(13.0));
    const auto asym = partition_powers(sorted, 0.625, PartitionMode::Asymptotic);
    CHECK(asym.v_dif == doctest::Approx(3.0 + 0.5 * 4.0));

    const SortedSignal flat(std::vector<Complex>(8, Complex(std::sqrt(3.0 / 8.0), 0.0)));
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double alpha = rng.uniform();
        const auto p = partition_powers(flat, alpha, PartitionMode::Asymptotic);
        CHECK(p.v_dif == doctest::Approx(alpha * 3.0).epsilon(1e-13));
        CHECK(p.v_dif + p.v_eq == doctest::Approx(3.0).epsilon(1e-15));
        const auto e = partition_powers(flat, alpha);
        CHECK(e.v_dif + e.v_eq == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(e.v_dif <= p.v_dif + 1e-12);
    }
}

TEST_CASE("observations follow the phaseless model") {
    // With ||b||² = v the noiseless output |<x, b>|² is exponential with mean v.
    const std::size_t n = 5000;
    const std::vector<Complex> beta{{0.6, 0.0}, {0.0, 0.8}};
    Rng rng(77);
    const auto x = sample_matrix(n, 2, rng);
    const auto noise = NoiseModel::gaussian(0.25);
    const auto obs = observe_detailed(x, beta, noise, rng);
    std::vector<double> clean(n);
    for (std::size_t i = 0; i < n; ++i) {
        clean[i] = obs.y[i] - obs.z[i];
        CHECK(clean[i] == doctest::Approx(std::norm(inner(x.row(i), beta))));
    }
    const double d = ks_distance(clean, [](double u) { return 1.0 - std::exp(-u); });
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));
    const double zd = ks_distance(obs.z, [](double z) { return 0.5 * std::erfc(-z / (0.5 * std::sqrt(2.0))); });
    CHECK(zd < 1.63 / std::sqrt(static_cast<double>(n)));

    CHECK_THROWS_AS(observe(x, std::vector<Complex>{{1.0, 0.0}}, noise, rng), std::invalid_argument);
}

TEST_CASE("instances are reproducible from their records") {
    const auto signal = SignalModel::discrete_flat(1.0, 3);
    const auto noise = NoiseModel::gaussian(0.1);
    const auto a = generate_instance(12, 6, signal, noise, 99);
    const auto b = generate_instance(12, 6, signal, noise, 99);
    CHECK(a.y == b.y);
    CHECK(a.support == b.support);
    const auto c = generate_instance(12, 6, signal, noise, 100);
    CHECK(a.y != c.y);

    auto record = instance_to_json(a);
    const auto replayed = replay_instance(record, signal, noise);
    CHECK(replayed.y == a.y);
    record["y"][0] = record["y"][0].get<double>() + 1.0;
    CHECK_THROWS(replay_instance(record, signal, noise));
}

TEST_CASE("parallel_for results do not depend on thread count") {
    auto run = [](unsigned threads) {
        std::vector<double> out(1000);
        parallel_for(out.size(), threads, [&](std::size_t i) {
            auto rng = substream(1, stream::kTrial, i);
            out[i] = rng.normal();
        });
        return compensated_sum(out);
    };
    CHECK(run(1) == run(4));
    CHECK_THROWS(parallel_for(10, 2, [](std::size_t i) {
        if (i == 7) throw std::runtime_error("boom");
    }));
}

TEST_CASE("numerics helpers") {
    const auto g = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-10);
    CHECK(g.x == doctest::Approx(0.3).epsilon(1e-8));
    const auto edge = golden_section_max([](double x) { return x; }, 0.0, 1.0, 1e-10);
    CHECK(edge.x == 1.0);
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 5.0) == doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-13));
    std::vector<double> v(1000, 0.1);
    CHECK(compensated_sum(v) == doctest::Approx(100.0).epsilon(1e-15));
}
