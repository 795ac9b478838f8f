#include <doctest.h>

#include <cmath>
#include <random>

#include "qp_oracle.hpp"
#include "qwave/svm.hpp"

using namespace qwave;

namespace {

kernel::KernelMatrix wrap(Eigen::MatrixXd m, std::string name = "test") {
    kernel::KernelMatrix k;
    k.values = std::move(m);
    k.meta.map = std::move(name);
    return k;
}

// RBF Gram matrix computed directly in the test.
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& x, double gamma) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k(i, j) = std::exp(-gamma * (x.row(i) - x.row(j)).squaredNorm());
    return k;
}

std::vector<double> col_to_vec(const Eigen::MatrixXd& k, int i) {
    std::vector<double> v(k.rows());
    for (Eigen::Index t = 0; t < k.rows(); ++t) v[t] = k(t, i);
    return v;
}

}  // namespace

TEST_CASE("two-point identity kernel") {
    const auto k = wrap(Eigen::MatrixXd::Identity(2, 2));
    const std::vector<int> y{1, -1};
    const svm::SvmModel m = svm::train_dual(k, y, 10.0);
    CHECK(m.alpha[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.alpha[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.b == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(svm::predict(m, std::vector<double>{1.0, 0.0}) == 1);
    CHECK(svm::predict(m, std::vector<double>{0.0, 1.0}) == -1);
    CHECK(m.support_idx == std::vector<int>{0, 1});
}

TEST_CASE("train_dual contract errors") {
    const auto k = wrap(Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(svm::train_dual(k, std::vector<int>{1, 1}, 1.0), ContractError);

    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 1.2, 1.2, 1.0;
    CHECK_THROWS_AS(svm::train_dual(wrap(indefinite), std::vector<int>{1, -1}, 1.0),
                    ContractError);
}

TEST_CASE("separable instance reaches full training accuracy") {
    Eigen::MatrixXd x(4, 2);
    x << 0.0, 0.0, 0.1, 0.2, 1.0, 1.0, 0.9, 0.8;
    const std::vector<int> y{-1, -1, 1, 1};
    const auto k = wrap(rbf_gram(x, 1.0));
    const svm::SvmModel m = svm::train_dual(k, y, 10.0);
    for (int i = 0; i < 4; ++i)
        CHECK(svm::predict(m, col_to_vec(k.values, i)) == y[i]);
    CHECK(m.kkt_residual <= 1e-3);
}

TEST_CASE("conflicting duplicates hit the box") {
    Eigen::MatrixXd k(2, 2);
    k << 1.0, 1.0, 1.0, 1.0;
    const std::vector<int> y{1, -1};
    const double c = 2.5;
    const svm::SvmModel m = svm::train_dual(wrap(k), y, c);
    CHECK(m.alpha[0] == doctest::Approx(c).epsilon(1e-9));
    CHECK(m.alpha[1] == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("prediction conventions") {
    svm::SvmModel m;
    m.alpha = Eigen::Vector2d(1.0, 1.0);
    m.y = {1, -1};
    m.b = 0.0;
    m.C = 1.0;
    // decision exactly zero resolves to +1
    CHECK(svm::predict(m, std::vector<double>{0.5, 0.5}) == 1);
    // all-zero kernel row falls back to sign(b), tie resolved to +1 at b = 0
    CHECK(svm::predict(m, std::vector<double>{0.0, 0.0}) == 1);
    m.b = -0.25;
    CHECK(svm::predict(m, std::vector<double>{0.0, 0.0}) == -1);
}

TEST_CASE("dual feasibility holds on random instances") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 12;
        Eigen::MatrixXd x(n, 3);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 3; ++j) x(i, j) = unif(rng);
            y[i] = i % 2 ? 1 : -1;
        }
        const double c = 0.5 + 2.0 * unif(rng);
        const svm::SvmModel m = svm::train_dual(wrap(rbf_gram(x, 1.5)), y, c);
        double eq = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(m.alpha[i] >= -1e-12);
            CHECK(m.alpha[i] <= c + 1e-12);
            eq += m.alpha[i] * y[i];
        }
        CHECK(std::abs(eq) <= 1e-8);
        CHECK(m.kkt_residual <= 1e-3);
    }
}

TEST_CASE("objective matches the enumeration oracle") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(unif(rng) * 4.99);  // 4..8
        Eigen::MatrixXd x(n, 2);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = unif(rng);
            x(i, 1) = unif(rng);
            y[i] = i % 2 ? 1 : -1;
        }
        const double c = 0.5 + unif(rng);
        const Eigen::MatrixXd gram = rbf_gram(x, 2.0);
        const svm::SvmModel m = svm::train_dual(wrap(gram), y, c, 1e-6);
        const double smo_obj = -svm::dual_objective(gram, y, m.alpha);  // min form
        const auto oracle = qp_oracle::svm_dual(gram, y, c);
        REQUIRE(oracle.found);
        CHECK(smo_obj == doctest::Approx(oracle.objective).epsilon(1e-4));
    }
}

TEST_CASE("kernel scaling with compensating C keeps predictions") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 10;
        Eigen::MatrixXd x(n, 2);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = unif(rng) + (i % 2 ? 0.8 : 0.0);
            x(i, 1) = unif(rng);
            y[i] = i % 2 ? 1 : -1;
        }
        const Eigen::MatrixXd gram = rbf_gram(x, 1.0);
        const double scale = 3.7;
        const svm::SvmModel base = svm::train_dual(wrap(gram), y, 1.0, 1e-6);
        const svm::SvmModel scaled =
            svm::train_dual(wrap((scale * gram).eval()), y, 1.0 / scale, 1e-6);
        for (int i = 0; i < n; ++i) {
            const auto row = col_to_vec(gram, i);
            std::vector<double> srow(row);
            for (double& v : srow) v *= scale;
            CHECK(svm::predict(base, row) == svm::predict(scaled, srow));
        }
    }
}

TEST_CASE("one-class training") {
    // nu = 1 forces the uniform solution
    Eigen::MatrixXd x(5, 2);
    x << 0.1, 0.2, 0.15, 0.25, 0.2, 0.1, 0.12, 0.18, 0.22, 0.2;
    const auto k = wrap(rbf_gram(x, 1.0));
    const svm::OneClassModel uniform = svm::train_one_class(k, 1.0);
    for (int i = 0; i < 5; ++i) CHECK(uniform.alpha[i] == doctest::Approx(0.2).epsilon(1e-12));

    CHECK_THROWS_AS(svm::train_one_class(k, 0.0), ContractError);
    CHECK_THROWS_AS(svm::train_one_class(k, 1.5), ContractError);

    // tight cluster plus one far outlier
    Eigen::MatrixXd xc(11, 2);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 0.05);
    for (int i = 0; i < 10; ++i) {
        xc(i, 0) = 0.3 + g(rng);
        xc(i, 1) = 0.3 + g(rng);
    }
    xc(10, 0) = 0.95;
    xc(10, 1) = 0.95;
    const Eigen::MatrixXd gram = rbf_gram(xc, 8.0);
    const svm::OneClassModel m = svm::train_one_class(wrap(gram), 0.1, 1e-6);
    CHECK(svm::one_class_decision(m, col_to_vec(gram, 10)) < 0.0);
}

TEST_CASE("nu bounds the training outlier fraction") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 14;
        Eigen::MatrixXd x(n, 2);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = unif(rng);
            x(i, 1) = unif(rng);
        }
        const double nu = 0.1 + 0.6 * unif(rng);
        const Eigen::MatrixXd gram = rbf_gram(x, 2.0);
        const svm::OneClassModel m = svm::train_one_class(wrap(gram), nu, 1e-8);
        // boundary support vectors land within solver tolerance of zero and
        // are not outliers; count decisions strictly below that band
        int outliers = 0;
        for (int i = 0; i < n; ++i)
            if (svm::one_class_decision(m, col_to_vec(gram, i)) < -1e-5) ++outliers;
        CHECK(static_cast<double>(outliers) / n <= nu + 0.05);
    }
}

TEST_CASE("one-class objective matches the enumeration oracle") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + static_cast<int>(unif(rng) * 3.99);  // 5..8
        Eigen::MatrixXd x(n, 2);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = unif(rng);
            x(i, 1) = unif(rng);
        }
        const double nu = 0.3 + 0.5 * unif(rng);
        const Eigen::MatrixXd gram = rbf_gram(x, 1.0);
        const svm::OneClassModel m = svm::train_one_class(wrap(gram), nu, 1e-8);
        const double obj = 0.5 * m.alpha.dot(gram * m.alpha);
        const auto oracle = qp_oracle::one_class_dual(gram, nu);
        REQUIRE(oracle.found);
        CHECK(obj == doctest::Approx(oracle.objective).epsilon(1e-4));
    }
}

TEST_CASE("weighted hinge loss and gradient") {
    Eigen::MatrixXd x(2, 2);
    x << 2.0, 0.0, -2.0, 0.0;
    const std::vector<int> y{1, -1};
    const std::vector<double> w1{1.0, 1.0};
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;

    // margins are y * (w.x) = 2 > 1: no loss, no gradient
    CHECK(svm::weighted_hinge_loss(w, 0.0, x, y, w1) == doctest::Approx(0.0));
    const auto g = svm::weighted_hinge_gradient(w, 0.0, x, y, w1);
    CHECK(g.grad_w.norm() == doctest::Approx(0.0));
    CHECK(g.grad_b == doctest::Approx(0.0));

    // unit weights reduce to the plain averaged hinge
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(2);
    const double plain = svm::weighted_hinge_loss(w0, 0.0, x, y, w1);
    CHECK(plain == doctest::Approx(1.0));  // max(0, 1 - 0) averaged

    const std::vector<double> biased{2.0, 1.0};
    const double weighted = svm::weighted_hinge_loss(w0, 0.0, x, y, biased);
    CHECK(weighted == doctest::Approx(1.0));  // both margins equal -> same loss
}

TEST_CASE("weighted hinge gradient matches central differences") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> wdist(0.2, 2.0);
    const double step = 1e-5;
    int checked = 0;
    while (checked < 50) {
        const int n = 6, d = 3;
        Eigen::MatrixXd x(n, d);
        std::vector<int> y(n);
        std::vector<double> weights(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) x(i, j) = g(rng);
            y[i] = g(rng) > 0 ? 1 : -1;
            weights[i] = wdist(rng);
        }
        Eigen::VectorXd w(d);
        for (int j = 0; j < d; ++j) w[j] = 0.5 * g(rng);
        const double b = 0.3 * g(rng);

        // stay away from hinge kinks where the subgradient jumps
        bool near_kink = false;
        for (int i = 0; i < n; ++i)
            if (std::abs(1.0 - y[i] * (x.row(i).dot(w) + b)) < 1e-4) near_kink = true;
        if (near_kink) continue;

        const auto grad = svm::weighted_hinge_gradient(w, b, x, y, weights);
        for (int j = 0; j < d; ++j) {
            Eigen::VectorXd wp = w, wm = w;
            wp[j] += step;
            wm[j] -= step;
            const double fd = (svm::weighted_hinge_loss(wp, b, x, y, weights) -
                               svm::weighted_hinge_loss(wm, b, x, y, weights)) /
                              (2.0 * step);
            CHECK(std::abs(grad.grad_w[j] - fd) <= 1e-5);
        }
        const double fdb = (svm::weighted_hinge_loss(w, b + step, x, y, weights) -
                            svm::weighted_hinge_loss(w, b - step, x, y, weights)) /
                           (2.0 * step);
        CHECK(std::abs(grad.grad_b - fdb) <= 1e-5);
        ++checked;
    }
}

TEST_CASE("svc loss on an orthogonal two-point instance") {
    // zz inputs 0 and pi/2 on one qubit give K = I: the dual optimum is 1
    Eigen::MatrixXd x(2, 1);
    x << 0.0, std::numbers::pi / 2.0;
    const std::vector<int> y{1, -1};
    kernel::KernelExecOptions opts;
    const std::vector<double> theta{0.0};
    const double loss = svm::svc_loss(theta, x, y, 2, 10.0, opts);
    CHECK(loss == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("svc loss is invariant under consistent row permutation") {
    Eigen::MatrixXd x(6, 2);
    x << 0.1, 0.9, 0.3, 0.2, 0.8, 0.4, 0.5, 0.5, 0.9, 0.1, 0.2, 0.6;
    const std::vector<int> y{1, -1, 1, -1, 1, -1};
    Eigen::MatrixXd xp(6, 2);
    const std::vector<int> perm{3, 0, 5, 1, 4, 2};
    std::vector<int> yp(6);
    for (int i = 0; i < 6; ++i) {
        xp.row(i) = x.row(perm[i]);
        yp[i] = y[perm[i]];
    }
    kernel::KernelExecOptions opts;
    const std::vector<double> theta{0.4, -0.2};
    const double a = svm::svc_loss(theta, x, y, 2, 1.0, opts);
    const double b = svm::svc_loss(theta, xp, yp, 2, 1.0, opts);
    CHECK(a == doctest::Approx(b).epsilon(1e-5));
}

TEST_CASE("evaluation metrics") {
    const std::vector<int> truth{1, 1, -1, -1};
    const svm::Metrics perfect = svm::evaluate(truth, truth);
    CHECK(perfect.accuracy == doctest::Approx(1.0));
    CHECK(perfect.confusion[0][1] == 0);
    CHECK(perfect.confusion[1][0] == 0);
    CHECK(perfect.f1[0] == doctest::Approx(1.0));
    CHECK(perfect.f1[1] == doctest::Approx(1.0));

    std::vector<int> pred30(30, 1), truth30(30, 1);
    pred30[7] = -1;
    const svm::Metrics near = svm::evaluate(pred30, truth30);
    CHECK(near.accuracy == doctest::Approx(29.0 / 30.0).epsilon(1e-12));
    CHECK(near.accuracy * 100.0 == doctest::Approx(96.67).epsilon(1e-3));

    const std::vector<int> all_pos(4, 1);
    const svm::Metrics onesided = svm::evaluate(all_pos, truth);
    CHECK(onesided.recall[0] == doctest::Approx(0.0));

    CHECK_THROWS_AS(svm::evaluate(std::vector<int>{}, std::vector<int>{}), ContractError);
}
