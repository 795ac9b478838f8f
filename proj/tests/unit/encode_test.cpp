#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qwave/encode.hpp"

using namespace qwave;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("minmax normalization") {
    const std::vector<double> x{0.0, 5.0, 10.0};
    const std::vector<double> mn{0.0, 0.0, 0.0}, mx{10.0, 10.0, 10.0};
    const auto out = encode::minmax_normalize(x, mn, mx);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(0.5));
    CHECK(out[2] == doctest::Approx(1.0));

    const std::vector<double> c{7.0, 7.0, 7.0};
    const std::vector<double> c7{7.0, 7.0, 7.0};
    const auto constant = encode::minmax_normalize(c, c7, c7);
    for (double v : constant) CHECK(v == doctest::Approx(0.5));

    const std::vector<double> one{2.0}, lo{0.0}, hi{8.0};
    CHECK(encode::minmax_normalize(one, lo, hi)[0] == doctest::Approx(0.25));

    const std::vector<double> bad_hi{-1.0};
    CHECK_THROWS_AS(encode::minmax_normalize(one, lo, bad_hi), ContractError);
}

TEST_CASE("ry angle mapping with clipping") {
    const std::vector<double> half{0.5};
    CHECK(encode::ry_angles(half)[0] == doctest::Approx(kPi / 2.0).epsilon(1e-12));

    const std::vector<double> zero{0.0};
    const double expect_low = 2.0 * std::asin(std::sqrt(1e-6));
    CHECK(encode::ry_angles(zero)[0] == doctest::Approx(expect_low).epsilon(1e-12));
    CHECK(encode::ry_angles(zero)[0] == doctest::Approx(2.0e-3).epsilon(1e-3));

    const std::vector<double> one{1.0};
    CHECK(encode::ry_angles(one)[0] == doctest::Approx(kPi - expect_low).epsilon(1e-12));

    const std::vector<double> out_of_range{1.1};
    CHECK_THROWS_AS(encode::ry_angles(out_of_range), ContractError);
}

TEST_CASE("product ry preparation") {
    const std::vector<double> a1{kPi / 2.0};
    auto s = sim::run_exact(encode::product_ry_prepare(a1));
    CHECK(s.amp[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(s.amp[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    const std::vector<double> a2{kPi / 2.0, kPi / 2.0};
    s = sim::run_exact(encode::product_ry_prepare(a2));
    for (int i = 0; i < 4; ++i)
        CHECK(std::norm(s.amp[i]) == doctest::Approx(0.25).epsilon(1e-12));

    const std::vector<double> c{0.3, 0.8};
    s = sim::run_exact(encode::product_ry_prepare(encode::ry_angles(c)));
    const auto probs = sim::exact_probabilities(s);
    // marginals: P(qubit0 = 1) = 0.3, P(qubit1 = 1) = 0.8
    CHECK(probs[1] + probs[3] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(probs[2] + probs[3] == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("product ry marginal law under sampling") {
    const std::vector<double> c{0.2, 0.65, 0.4};
    sim::Circuit circ = encode::product_ry_prepare(encode::ry_angles(c));
    circ.push(sim::Gate::measure_all());
    const std::uint64_t shots = 65536;
    const sim::Counts counts = sim::run_shots(circ, shots, std::nullopt, 21);
    for (int q = 0; q < 3; ++q) {
        double ones = 0.0;
        for (const auto& [bits, n] : counts.histogram)
            if (bits[2 - q] == '1') ones += static_cast<double>(n);
        const double sigma = std::sqrt(c[q] * (1.0 - c[q]) * shots);
        CHECK(std::abs(ones - c[q] * shots) <= 4.0 * sigma);
    }
}

TEST_CASE("amplitude preparation examples") {
    const std::vector<double> x34{3.0, 4.0};
    auto s = sim::run_exact(encode::amplitude_prepare(x34));
    CHECK(s.amp[0].real() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(s.amp[1].real() == doctest::Approx(0.8).epsilon(1e-12));

    const std::vector<double> ones{1.0, 1.0, 1.0, 1.0};
    s = sim::run_exact(encode::amplitude_prepare(ones));
    for (int i = 0; i < 4; ++i) CHECK(s.amp[i].real() == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<double> sparse{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0};
    s = sim::run_exact(encode::amplitude_prepare(sparse));
    CHECK(s.amp[0].real() == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-10));
    CHECK(s.amp[7].real() == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-10));
    for (int i = 1; i < 7; ++i) CHECK(std::abs(s.amp[i]) < 1e-10);

    const std::vector<double> zeros{0.0, 0.0};
    CHECK_THROWS_AS(encode::amplitude_prepare(zeros), ContractError);
    const std::vector<double> negative{1.0, -1.0};
    CHECK_THROWS_AS(encode::amplitude_prepare(negative), ContractError);
}

TEST_CASE("amplitude round trip on random non-negative vectors") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int n = 1; n <= 6; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> x(std::size_t{1} << n);
            for (double& v : x) v = unif(rng);
            const auto target = encode::amplitude_target(x);
            const auto s = sim::run_exact(encode::amplitude_prepare(x));
            double err2 = 0.0;
            for (std::size_t i = 0; i < target.size(); ++i)
                err2 += std::norm(s.amp[i] - sim::complexd(target[i], 0.0));
            CHECK(std::sqrt(err2) <= 1e-10);
        }
    }
}

TEST_CASE("padding zeros never disturbs the nonzero amplitudes") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    std::vector<double> x(6);
    for (double& v : x) v = unif(rng);

    const auto s_padded = sim::run_exact(encode::amplitude_prepare(x));  // padded to 8
    std::vector<double> x16 = x;
    x16.resize(16, 0.0);
    const auto s_wide = sim::run_exact(encode::amplitude_prepare(x16));
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(std::abs(s_padded.amp[i] - s_wide.amp[i]) < 1e-12);
    for (std::size_t i = 8; i < 16; ++i) CHECK(std::abs(s_wide.amp[i]) < 1e-12);
}

TEST_CASE("sparse inputs produce shallower circuits") {
    std::vector<double> dense(16);
    for (std::size_t i = 0; i < dense.size(); ++i) dense[i] = 0.3 + 0.04 * i;
    std::vector<double> sparse(16, 0.0);
    sparse[0] = 1.0;
    sparse[9] = 2.0;
    const auto dense_gates = encode::amplitude_prepare(dense).gates.size();
    const auto sparse_gates = encode::amplitude_prepare(sparse).gates.size();
    CHECK(sparse_gates < dense_gates);
}
