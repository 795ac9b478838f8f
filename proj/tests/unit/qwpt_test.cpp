#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qwave/qwpt.hpp"

using namespace qwave;
using qwpt::QwptConfig;

namespace {

QwptConfig cfg_of(int n, int h, bool rz, qwpt::CircuitStyle style) {
    QwptConfig c;
    c.n_qubits = n;
    c.levels = h;
    c.use_rz_phase = rz;
    c.style = style;
    return c;
}

std::vector<std::vector<double>> random_samples(int count, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (auto& s : out)
        for (double& v : s) v = unif(rng);
    return out;
}

}  // namespace

TEST_CASE("literal pair-schedule circuit") {
    const sim::Circuit c1 =
        qwpt::build_qwpt_circuit(cfg_of(2, 1, false, qwpt::CircuitStyle::PaperPairs));
    REQUIRE(c1.gates.size() == 3);
    CHECK(c1.gates[0].kind == sim::GateKind::Barrier);
    CHECK(c1.gates[1].kind == sim::GateKind::Cx);
    CHECK(c1.gates[1].q[0] == 0);
    CHECK(c1.gates[1].q[1] == 1);
    CHECK(c1.gates[2].kind == sim::GateKind::H);
    CHECK(c1.gates[2].q[0] == 0);

    const sim::Circuit c2 =
        qwpt::build_qwpt_circuit(cfg_of(2, 1, true, qwpt::CircuitStyle::PaperPairs));
    REQUIRE(c2.gates.size() == 4);
    CHECK(c2.gates[3].kind == sim::GateKind::Rz);
    CHECK(c2.gates[3].q[0] == 1);
    CHECK(c2.gates[3].angle == doctest::Approx(std::numbers::pi / 4.0));

    // n=4, h=2: level 0 pairs (0,1),(2,3); level 1 pairs (0,2),(1,3)
    const sim::Circuit c3 =
        qwpt::build_qwpt_circuit(cfg_of(4, 2, false, qwpt::CircuitStyle::PaperPairs));
    int barriers = 0, cx = 0, h = 0;
    for (const auto& g : c3.gates) {
        if (g.kind == sim::GateKind::Barrier) ++barriers;
        if (g.kind == sim::GateKind::Cx) ++cx;
        if (g.kind == sim::GateKind::H) ++h;
    }
    CHECK(barriers == 2);
    CHECK(cx == 4);
    CHECK(h == 4);
    CHECK(c3.unitary_gate_count() == 2 * 2 * 2);
    std::vector<std::pair<int, int>> pairs;
    for (const auto& g : c3.gates)
        if (g.kind == sim::GateKind::Cx) pairs.emplace_back(g.q[0], g.q[1]);
    CHECK(pairs == std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {0, 2}, {1, 3}});

    CHECK_THROWS_AS(qwpt::build_qwpt_circuit(cfg_of(3, 3, false, qwpt::CircuitStyle::PaperPairs)),
                    ContractError);
}

TEST_CASE("gate count stays within 3 h n") {
    for (int n = 2; n <= 8; ++n)
        for (int h = 1; h < n; ++h) {
            const auto c = qwpt::build_qwpt_circuit(cfg_of(n, h, true, qwpt::CircuitStyle::PaperPairs));
            CHECK(c.unitary_gate_count() <= static_cast<std::size_t>(3 * h * n));
            const auto b = qwpt::build_butterfly_circuit(n, h);
            CHECK(b.unitary_gate_count() <= static_cast<std::size_t>(3 * h * n));
        }
}

TEST_CASE("near-zero input concentrates in the low block") {
    QwptConfig cfg = cfg_of(3, 1, false, qwpt::CircuitStyle::PaperPairs);
    cfg.execution = qwpt::ExecutionMode::ExactAmplitudes;
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    const qwpt::WptFeatures w = qwpt::run_qwpt(encode::encode_product_ry(zeros), cfg);
    CHECK(w.subband_energy[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(w.wpee <= 1e-4);
    CHECK(w.f[0] + w.f[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("sub-band energies always partition the mass") {
    QwptConfig cfg = cfg_of(3, 1, true, qwpt::CircuitStyle::PaperPairs);
    const std::vector<double> uniform{0.5, 0.5, 0.5};
    const qwpt::WptFeatures w = qwpt::run_qwpt(encode::encode_product_ry(uniform), cfg);
    double esum = 0.0;
    for (double e : w.subband_energy) esum += e;
    CHECK(esum == doctest::Approx(1.0).epsilon(1e-9));
    double fsum = 0.0;
    for (double v : w.f) {
        CHECK(v >= 0.0);
        fsum += v;
    }
    CHECK(fsum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("shot execution stays close to exact features") {
    QwptConfig exact_cfg = cfg_of(4, 2, true, qwpt::CircuitStyle::PaperPairs);
    QwptConfig shot_cfg = exact_cfg;
    shot_cfg.execution = qwpt::ExecutionMode::Shots;
    shot_cfg.shots = 8192;
    shot_cfg.seed = 3;
    const std::vector<double> c{0.15, 0.7, 0.45, 0.9};
    const auto sample = encode::encode_product_ry(c);
    const auto we = qwpt::run_qwpt(sample, exact_cfg);
    const auto ws = qwpt::run_qwpt(sample, shot_cfg);
    double tv = 0.0;
    for (std::size_t i = 0; i < we.f.size(); ++i) tv += std::abs(we.f[i] - ws.f[i]);
    CHECK(0.5 * tv <= 0.05);
}

TEST_CASE("classical haar packet tree") {
    const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
    const auto t1 = qwpt::classical_haar_wpt(flat, 1);
    const double s2 = std::sqrt(2.0);
    CHECK(t1.leaves()[0][0] == doctest::Approx(s2).epsilon(1e-12));
    CHECK(t1.leaves()[0][1] == doctest::Approx(s2).epsilon(1e-12));
    CHECK(t1.leaves()[1][0] == doctest::Approx(0.0));
    CHECK(t1.leaves()[1][1] == doctest::Approx(0.0));

    const std::vector<double> det{1.0, -1.0};
    const auto t2 = qwpt::classical_haar_wpt(det, 1);
    CHECK(t2.leaves()[0][0] == doctest::Approx(0.0));
    CHECK(t2.leaves()[1][0] == doctest::Approx(s2).epsilon(1e-12));

    const std::vector<double> odd{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(qwpt::classical_haar_wpt(odd, 1), ContractError);
}

// The full level-h packet transform of a length-8 signal, assembled column by
// column from unit vectors, must be orthogonal; orthogonality is the energy
// oracle.
TEST_CASE("packet transform is orthogonal and preserves energy") {
    const int m = 8;
    Eigen::MatrixXd w(m, m);
    for (int col = 0; col < m; ++col) {
        std::vector<double> unit(m, 0.0);
        unit[col] = 1.0;
        const auto v = qwpt::classical_haar_wpt(unit, 2).inplace_vector();
        for (int row = 0; row < m; ++row) w(row, col) = v[row];
    }
    const Eigen::MatrixXd gram = w.transpose() * w;
    CHECK((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> sig(m);
    double in_energy = 0.0;
    for (double& v : sig) {
        v = g(rng);
        in_energy += v * v;
    }
    const auto coeffs = qwpt::classical_haar_wpt(sig, 2).inplace_vector();
    double out_energy = 0.0;
    for (double v : coeffs) out_energy += v * v;
    CHECK(out_energy == doctest::Approx(in_energy).epsilon(1e-12));
}

TEST_CASE("butterfly circuit amplitudes equal classical packet coefficients") {
    QwptConfig cfg = cfg_of(2, 1, false, qwpt::CircuitStyle::HaarButterfly);
    const std::vector<std::vector<double>> flat{{1.0, 1.0, 1.0, 1.0}};
    CHECK(qwpt::validate_qwpt_against_classical(flat, cfg) < 1e-6);

    QwptConfig cfg8 = cfg_of(3, 2, false, qwpt::CircuitStyle::HaarButterfly);
    const auto samples = random_samples(50, 8, 23);
    CHECK(qwpt::validate_qwpt_against_classical(samples, cfg8) < 1e-6);

    // the optional phase gate leaves the real Haar transform
    QwptConfig cfg_rz = cfg8;
    cfg_rz.use_rz_phase = true;
    CHECK(qwpt::validate_qwpt_against_classical(samples, cfg_rz) > 1e-6);
}

TEST_CASE("wpee bounds and extremes") {
    const int n = 4, h = 2;
    std::vector<double> concentrated(16, 0.0);
    concentrated[0] = 1.0;
    const auto w0 = qwpt::features_from_probabilities(concentrated, h);
    CHECK(w0.wpee == doctest::Approx(0.0).epsilon(1e-9));

    std::vector<double> uniform(16, 1.0 / 16.0);
    const auto w1 = qwpt::features_from_probabilities(uniform, h);
    CHECK(w1.wpee == doctest::Approx(h * std::log(2.0)).epsilon(1e-9));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> probs(1 << n);
        double total = 0.0;
        for (double& p : probs) {
            p = unif(rng);
            total += p;
        }
        for (double& p : probs) p /= total;
        const auto w = qwpt::features_from_probabilities(probs, h);
        CHECK(w.wpee >= 0.0);
        CHECK(w.wpee <= h * std::log(2.0) + 1e-12);
        double esum = 0.0;
        for (double e : w.subband_energy) esum += e;
        CHECK(esum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("recursive decomposition") {
    const std::vector<double> c{0.3, 0.6, 0.2, 0.8};
    const auto sample = encode::encode_product_ry(c);

    QwptConfig base = cfg_of(4, 1, false, qwpt::CircuitStyle::PaperPairs);
    const auto single = qwpt::recursive_decompose(sample, base);
    REQUIRE(single.size() == 1);
    const auto direct = qwpt::run_qwpt(sample, base);
    for (std::size_t i = 0; i < direct.f.size(); ++i)
        CHECK(single[0].f[i] == doctest::Approx(direct.f[i]).epsilon(1e-12));

    QwptConfig two = cfg_of(4, 2, false, qwpt::CircuitStyle::PaperPairs);
    const auto nodes = qwpt::recursive_decompose(sample, two);
    CHECK(nodes.size() == 3);  // root, A branch, D branch
    CHECK(nodes[1].f.size() == 256);  // halves re-encode on 8 qubits

    // Zero sampled detail mass at the root: the D branch takes the degenerate
    // rule (uniform re-encoding) and its transformed mass peaks at index 0.
    // Exact execution cannot reach the rule because the clip floor leaks
    // ~1e-6 of mass into every block; sampled counts can be exactly zero.
    const std::vector<double> tiny{0.0, 0.0, 0.0};
    QwptConfig small = cfg_of(3, 2, false, qwpt::CircuitStyle::PaperPairs);
    small.execution = qwpt::ExecutionMode::Shots;
    small.shots = 512;
    small.seed = 12;
    const auto deg = qwpt::recursive_decompose(encode::encode_product_ry(tiny), small);
    REQUIRE(deg.size() == 3);
    const auto& d_branch = deg[2];
    const auto argmax =
        std::max_element(d_branch.f.begin(), d_branch.f.end()) - d_branch.f.begin();
    CHECK(argmax == 0);
}
