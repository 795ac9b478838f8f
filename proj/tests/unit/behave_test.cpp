#include <doctest.h>

#include <cmath>
#include <random>

#include "qwave/behave.hpp"

using namespace qwave;
using behave::Decision;

namespace {

// Test-side quantile oracle, independent of the incomplete-gamma route:
// adaptive Simpson integration of the chi-square density plus bisection.
// Integration runs in the sqrt-substituted variable so the dof=1 density has
// no singularity at the origin.
double chi2_sqrt_density(double t, int dof) {
    if (t <= 0.0) return 0.0;
    const double a = dof / 2.0;
    // 2 t f_X(t^2)
    return std::exp(std::log(2.0) + (2.0 * a - 1.0) * std::log(t) - t * t / 2.0 -
                    a * std::log(2.0) - std::lgamma(a));
}

double simpson(double (*f)(double, int), int dof, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a, dof) + 4.0 * f(m, dof) + f(b, dof));
}

double adaptive_simpson(double (*f)(double, int), int dof, double a, double b,
                        double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, dof, a, m);
    const double right = simpson(f, dof, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, dof, a, m, left, eps / 2.0, depth - 1) +
           adaptive_simpson(f, dof, m, b, right, eps / 2.0, depth - 1);
}

double chi2_cdf_oracle(double x, int dof) {
    if (x <= 0.0) return 0.0;
    const double upper = std::sqrt(x);
    return adaptive_simpson(chi2_sqrt_density, dof, 0.0, upper,
                            simpson(chi2_sqrt_density, dof, 0.0, upper), 1e-12, 40);
}

double chi2_quantile_oracle(double prob, int dof) {
    double lo = 0.0, hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
    while (chi2_cdf_oracle(hi, dof) < prob) hi *= 2.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (chi2_cdf_oracle(mid, dof) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("relative energies") {
    const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
    for (double p : behave::relative_energies(flat)) CHECK(p == doctest::Approx(0.25));

    const std::vector<double> two{2.0, 0.0};
    const auto p2 = behave::relative_energies(two);
    CHECK(p2[0] == doctest::Approx(1.0));
    CHECK(p2[1] == doctest::Approx(0.0));

    const std::vector<double> simplex{0.3, 0.1, 0.4, 0.2};
    const auto p3 = behave::relative_energies(simplex);
    for (std::size_t i = 0; i < simplex.size(); ++i)
        CHECK(p3[i] == doctest::Approx(simplex[i]).epsilon(1e-12));

    const std::vector<double> zeros{0.0, 0.0};
    CHECK_THROWS_AS(behave::relative_energies(zeros), ContractError);
}

TEST_CASE("normalized entropy") {
    const std::vector<double> uniform{0.25, 0.25, 0.25, 0.25};
    CHECK(behave::normalized_entropy(uniform) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> vertex{1.0, 0.0, 0.0, 0.0};
    CHECK(behave::normalized_entropy(vertex) == doctest::Approx(0.0));

    const std::vector<double> half{0.5, 0.5, 0.0, 0.0};
    CHECK(behave::normalized_entropy(half) == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<double> single{1.0};
    CHECK_THROWS_AS(behave::normalized_entropy(single), ContractError);
}

TEST_CASE("entropy extremes are tight") {
    const std::vector<double> vertex{0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    CHECK(std::abs(behave::normalized_entropy(vertex) - 0.0) <= 1e-9);
    const std::vector<double> uniform(8, 0.125);
    CHECK(std::abs(behave::normalized_entropy(uniform) - 1.0) <= 1e-9);
}

TEST_CASE("chi-square statistic") {
    const std::vector<double> e{5.0, 5.0};
    CHECK(behave::chi_square_statistic(e, e) == doctest::Approx(0.0));

    const std::vector<double> o{10.0, 0.0};
    CHECK(behave::chi_square_statistic(o, e) == doctest::Approx(10.0));

    const std::vector<double> o4{8.0, 12.0, 10.0, 10.0};
    const std::vector<double> e4{10.0, 10.0, 10.0, 10.0};
    CHECK(behave::chi_square_statistic(o4, e4) == doctest::Approx(0.8));

    const std::vector<double> bad_e{5.0, 0.0};
    CHECK_THROWS_AS(behave::chi_square_statistic(o, bad_e), ContractError);
}

TEST_CASE("permutation invariance of entropy and chi-square") {
    const std::vector<double> p{0.4, 0.3, 0.2, 0.1};
    const std::vector<double> perm{0.1, 0.4, 0.2, 0.3};
    CHECK(behave::normalized_entropy(p) ==
          doctest::Approx(behave::normalized_entropy(perm)).epsilon(1e-12));

    const std::vector<double> o{4.0, 7.0, 9.0}, e{5.0, 8.0, 7.0};
    const std::vector<double> op{9.0, 4.0, 7.0}, ep{7.0, 5.0, 8.0};
    CHECK(behave::chi_square_statistic(o, e) ==
          doctest::Approx(behave::chi_square_statistic(op, ep)).epsilon(1e-12));
}

TEST_CASE("chi-square decision rule") {
    CHECK(behave::chi_square_decision(0.0, 3) == Decision::Normal);
    CHECK(behave::chi_square_decision(10.0, 1) == Decision::Anomalous);
    CHECK(behave::chi_square_quantile(0.95, 1) == doctest::Approx(3.841).epsilon(1e-3));
    CHECK(behave::chi_square_decision(3.0, 7) == Decision::Normal);
    CHECK(behave::chi_square_quantile(0.95, 7) == doctest::Approx(14.067).epsilon(1e-3));
}

TEST_CASE("decision matches the integration oracle on random cases") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> dof_dist(1, 12);
    std::uniform_real_distribution<double> scale(0.2, 2.5);
    for (int trial = 0; trial < 100; ++trial) {
        const int dof = dof_dist(rng);
        const double crit_oracle = chi2_quantile_oracle(0.95, dof);
        const double chi2 = scale(rng) * crit_oracle;
        const Decision expect =
            chi2 <= crit_oracle ? Decision::Normal : Decision::Anomalous;
        CHECK(behave::chi_square_decision(chi2, dof) == expect);
        CHECK(behave::chi_square_quantile(0.95, dof) ==
              doctest::Approx(crit_oracle).epsilon(1e-6));
    }
}

TEST_CASE("benign reference construction") {
    // h_norm values spread evenly over [0,1]: invert the two-bin entropy
    std::vector<std::vector<double>> benign;
    for (int i = 0; i < 100; ++i) {
        const double target = (i + 0.5) / 100.0;
        double lo = 0.0, hi = 0.5;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const std::vector<double> p{mid, 1.0 - mid};
            (behave::normalized_entropy(p) < target ? lo : hi) = mid;
        }
        benign.push_back({lo, 1.0 - lo});
    }
    const auto ref = behave::build_benign_reference(benign, 8, 100);
    double total = 0.0;
    for (double e : ref.expected) total += e;
    CHECK(total == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(ref.dof == static_cast<int>(ref.expected.size()) - 1);
    for (double e : ref.expected) CHECK(e == doctest::Approx(12.5).epsilon(0.35));

    // identical h_norm everywhere collapses to a single bin
    std::vector<std::vector<double>> degenerate(40, {0.5, 0.5});
    CHECK_THROWS_AS(behave::build_benign_reference(degenerate, 8, 40), ContractError);

    std::vector<std::vector<double>> few(10, {0.3, 0.7});
    CHECK_THROWS_AS(behave::build_benign_reference(few, 8, 10), ContractError);
}

TEST_CASE("descriptive statistics") {
    Eigen::MatrixXd x(3, 1);
    x << 1.0, 2.0, 3.0;
    const auto s = behave::descriptive_stats(x);
    CHECK(s.mean[0] == doctest::Approx(2.0));
    CHECK(s.variance[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // identical features: the as-printed correlation convention gives n/(n-1)
    Eigen::MatrixXd dup(3, 2);
    dup << 1.0, 1.0, 2.0, 2.0, 3.0, 3.0;
    const auto sd = behave::descriptive_stats(dup);
    CHECK(sd.correlation(0, 1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(sd.correlation(0, 0) == doctest::Approx(1.0));
    REQUIRE(sd.out_of_range.size() == 1);
    CHECK(sd.out_of_range[0] == std::pair<int, int>{0, 1});

    Eigen::MatrixXd sym(3, 1);
    sym << -2.0, 0.0, 2.0;
    CHECK(behave::descriptive_stats(sym).skewness[0] == doctest::Approx(0.0));

    Eigen::MatrixXd konst(4, 2);
    konst << 1.0, 7.0, 2.0, 7.0, 3.0, 7.0, 4.0, 7.0;
    const auto sk = behave::descriptive_stats(konst);
    CHECK(sk.constant_features == std::vector<int>{1});
    CHECK(sk.correlation(1, 1) == doctest::Approx(1.0));
    CHECK(sk.correlation(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("marker appending stays RY-encodable") {
    const std::vector<double> f(16, 1.0 / 16.0);
    behave::BehavioralMarkers m;
    m.h_norm = 0.7;
    m.chi2 = 0.0;
    m.dof = 3;
    auto out = behave::append_markers(f, m);
    CHECK(out.size() == 18);
    CHECK(out[16] == doctest::Approx(0.7));
    CHECK(out[17] == doctest::Approx(0.0));

    m.chi2 = 3.0;  // chi2 == dof -> squashed marker is exactly one half
    out = behave::append_markers(f, m);
    CHECK(out[17] == doctest::Approx(0.5));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(0.0, 30.0);
    for (int trial = 0; trial < 50; ++trial) {
        m.chi2 = unif(rng);
        m.dof = 1 + trial % 6;
        m.h_norm = unif(rng) / 30.0;
        out = behave::append_markers(f, m);
        CHECK(out[16] >= 0.0);
        CHECK(out[16] < 1.0 + 1e-12);
        CHECK(out[17] >= 0.0);
        CHECK(out[17] < 1.0);
    }
}

TEST_CASE("per-sample profile divergence") {
    const std::vector<double> mean_p{0.4, 0.3, 0.2, 0.1};
    CHECK(behave::profile_chi_square(mean_p, mean_p) == doctest::Approx(0.0));
    const std::vector<double> shifted{0.1, 0.2, 0.3, 0.4};
    CHECK(behave::profile_chi_square(shifted, mean_p) > 0.0);

    const auto m = behave::markers_for_sample(shifted, mean_p);
    CHECK(m.dof == 3);
    CHECK(m.h_norm == doctest::Approx(behave::normalized_entropy(shifted)));
}
