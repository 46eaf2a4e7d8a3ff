#include <doctest.h>

#include "phaselim/errors.hpp"
#include "phaselim/simulator.hpp"

#include <cmath>
#include <sstream>

using namespace phaselim;

namespace {

SimConfig flat_config() {
    SimConfig c;
    c.p = 10;
    c.k = 2;
    c.alpha_star = 0.5;
    c.signal = SignalModel::discrete_flat(1.0, 2);
    c.noise = NoiseModel::gaussian(1e-6);
    c.trials = 200;
    return c;
}

// P(|S \ {0..k-1}| >= m) for S uniform over k-subsets of p: hypergeometric overlap.
double hypergeometric_miss(std::size_t p, std::size_t k, std::size_t m) {
    double total = 0.0;
    for (std::size_t overlap = 0; overlap <= k; ++overlap) {
        if (k - overlap < m) continue;
        total += binomial_coefficient(k, overlap) * binomial_coefficient(p - k, k - overlap);
    }
    return total / binomial_coefficient(p, k);
}

}  // namespace

TEST_CASE("binomial coefficients and support enumeration") {
    CHECK(binomial_coefficient(10, 2) == 45.0);
    CHECK(binomial_coefficient(30, 5) == 142506.0);
    CHECK(binomial_coefficient(3, 4) == 0.0);
    const auto all = all_supports(5, 3);
    REQUIRE(all.size() == 10);
    CHECK(all.front() == std::vector<std::size_t>{0, 1, 2});
    CHECK(all.back() == std::vector<std::size_t>{2, 3, 4});
    CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("error event floor arithmetic") {
    const SupportSet s(6, {0, 1, 2, 3});
    CHECK_FALSE(error_event(s, s, 4, 0.6));
    CHECK(error_event(s, SupportSet(6, {0, 1, 4, 5}), 4, 0.6));
    CHECK_FALSE(error_event(s, SupportSet(6, {0, 1, 2, 5}), 4, 0.6));
    CHECK(error_event(SupportSet(6, {0, 1}), SupportSet(6, {0, 2}), 2, 0.5));
    CHECK_THROWS_AS(error_event(s, SupportSet(6, {0}), 4, 0.6), std::invalid_argument);
}

TEST_CASE("configuration guards") {
    auto c = flat_config();
    CHECK_NOTHROW(validate(c));
    c.p = 30;
    c.k = 5;
    c.signal = SignalModel::discrete_flat(1.0, 5);
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = flat_config();
    c.alpha_star = 0.4;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = flat_config();
    c.signal = SignalModel::gaussian_iid(1.0, 2);
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.decoder = DecoderKind::McMarginal;
    CHECK_NOTHROW(validate(c));
    c.signal = SignalModel::discrete_general({{1.0, 0.0}, {2.0, 0.0}});
    CHECK_THROWS_AS(validate(c), Unsupported);
    c.decoder = DecoderKind::FlatMl;
    CHECK_THROWS_AS(validate(c), Unsupported);
    c.signal = SignalModel::discrete_general({{0.5, 0.5}, {0.5, 0.5}});
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("decoder edge cases") {
    auto c = flat_config();
    const auto empty = generate_instance(10, 0, c.signal, c.noise, 3);
    CHECK(decode(empty, c, 3) == SupportSet(10, {0, 1}));

    c.p = 2;
    const auto full = generate_instance(2, 5, c.signal, c.noise, 4);
    CHECK(decode(full, c, 4) == SupportSet(2, {0, 1}));
}

TEST_CASE("noiseless flat decoding recovers the support") {
    auto c = flat_config();
    int correct = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const auto instance = generate_instance(10, 20, c.signal, c.noise, 1000 + t);
        correct += decode(instance, c, t) == instance.support ? 1 : 0;
    }
    CHECK(correct >= 990);
}

TEST_CASE("score is invariant under a constant shift of the log-likelihood") {
    // Rescaling the noise variance shifts every support's log-likelihood by
    // the same constant when the observations are noiseless.
    auto c = flat_config();
    auto instance = generate_instance(10, 6, c.signal, c.noise, 12);
    instance.y = std::vector<double>(instance.y.size());
    for (std::size_t i = 0; i < instance.n; ++i) {
        Complex acc(0.0, 0.0);
        for (auto j : instance.support.indices()) acc += std::conj(instance.x(i, j)) * instance.beta[j];
        instance.y[i] = std::norm(acc);
    }
    const auto a = decode(instance, c, 1);
    c.noise = NoiseModel::gaussian(2.0);
    const auto b = decode(instance, c, 1);
    CHECK(a == instance.support);
    CHECK(b == a);
}

TEST_CASE("n = 0 error rate follows the hypergeometric law") {
    auto c = flat_config();
    c.n_grid = {0};
    c.trials = 4000;
    const auto curve = error_curve(c);
    const double expected = hypergeometric_miss(10, 2, 1);
    CHECK(expected == doctest::Approx(44.0 / 45.0));
    CHECK(std::abs(curve[0].pe - expected) < 4.0 * std::sqrt(expected * (1.0 - expected) / c.trials));

    c.p = 12;
    c.k = 4;
    c.alpha_star = 0.6;
    c.signal = SignalModel::discrete_flat(1.0, 4);
    const auto wide = error_curve(c);
    const double e2 = hypergeometric_miss(12, 4, 2);
    CHECK(std::abs(wide[0].pe - e2) < 4.0 * std::sqrt(e2 * (1.0 - e2) / c.trials));
}

TEST_CASE("error curves are deterministic, thread independent and monotone") {
    auto c = flat_config();
    c.n_grid = {0, 1, 2, 4, 8};
    const auto a = error_curve(c);
    c.threads = 3;
    const auto b = error_curve(c);
    std::ostringstream sa, sb;
    write_error_curve_csv(sa, a);
    write_error_curve_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("n,pe,se,trials\n0,", 0) == 0);
    CHECK(isotonic_residual(a) <= 3.0 * pooled_standard_error(a));
    for (const auto& p : a) {
        CHECK(p.pe >= 0.0);
        CHECK(p.pe <= 1.0);
    }
}

TEST_CASE("Gaussian signals with the marginal decoder") {
    SimConfig c;
    c.p = 6;
    c.k = 2;
    c.alpha_star = 0.5;
    c.signal = SignalModel::gaussian_iid(4.0, 2);
    c.noise = NoiseModel::gaussian(0.01);
    c.decoder = DecoderKind::McMarginal;
    c.mc_samples = 64;
    c.trials = 60;
    c.n_grid = {0, 30};
    const auto curve = error_curve(c);
    CHECK(curve[1].pe < curve[0].pe);
}

TEST_CASE("isotonic fit") {
    const std::vector<double> v{0.9, 0.5, 0.7, 0.1};
    const std::vector<double> w{1, 1, 1, 1};
    const auto fit = isotonic_nonincreasing(v, w);
    CHECK(fit == std::vector<double>{0.9, 0.6, 0.6, 0.1});
    const ErrorCurve curve{{0, 0.9, 0.01, 100}, {1, 0.5, 0.05, 100}, {2, 0.7, 0.05, 100}};
    CHECK(isotonic_residual(curve) == doctest::Approx(0.1));
}

TEST_CASE("config parsing") {
    const auto kv = parse_sim_config("p = 8\nk = 2 # comment\nn_grid = 0:10:5\nalpha_star=0.5\nsigma2=0.01\ntrials=7\nseed=42\n");
    CHECK(kv.p == 8);
    CHECK(kv.n_grid == std::vector<std::size_t>{0, 5, 10});
    CHECK(kv.trials == 7);
    CHECK(kv.master_seed == 42);
    CHECK(kv.noise.variance() == doctest::Approx(0.01));
    const auto js = parse_sim_config(R"({"p": 8, "k": 2, "n_grid": [1, 2], "signal": "gaussian", "c_beta": 2})");
    CHECK(js.n_grid == std::vector<std::size_t>{1, 2});
    CHECK(js.decoder == DecoderKind::McMarginal);
    CHECK(js.signal.c_beta() == 2.0);
    CHECK_THROWS(parse_sim_config("bogus = 1"));
    CHECK_THROWS(parse_sim_config("p"));
    CHECK_THROWS(parse_n_grid("5:1:1"));
    CHECK(parse_n_grid("3, 4,9") == std::vector<std::size_t>{3, 4, 9});
}
