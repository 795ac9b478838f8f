#include "qwave/spsa.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace qwave::spsa {

namespace {

constexpr double kBox = std::numbers::pi;

void clamp_box(std::vector<double>& v) {
    for (double& x : v) x = std::clamp(x, -kBox, kBox);
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::pair<std::vector<double>, SpsaTrace> spsa_minimize(const LossFn& loss,
                                                        std::span<const double> theta0,
                                                        const SpsaConfig& cfg) {
    require(static_cast<bool>(loss), "spsa: loss function required");
    require(!theta0.empty(), "spsa: empty parameter vector");
    require(cfg.perturbation > 0.0, "spsa: perturbation must be > 0");
    require(cfg.learning_rate > 0.0, "spsa: learning rate must be > 0");
    require(cfg.iterations >= 1, "spsa: iterations must be >= 1");

    const std::size_t d = theta0.size();
    std::vector<double> theta(theta0.begin(), theta0.end());
    clamp_box(theta);

    std::mt19937_64 rng(mix_seed(cfg.seed, 0x5b5a));
    std::bernoulli_distribution coin(0.5);

    SpsaTrace trace;
    trace.iterations.reserve(cfg.iterations);
    double c_scale = 1.0;

    for (int k = 0; k < cfg.iterations; ++k) {
        const double a_k = cfg.learning_rate / std::pow(k + 1.0, cfg.alpha_gain);
        const double c_k = c_scale * cfg.perturbation / std::pow(k + 1.0, cfg.gamma_gain);

        std::vector<double> delta(d);
        for (double& x : delta) x = coin(rng) ? 1.0 : -1.0;

        std::vector<double> plus(theta), minus(theta);
        for (std::size_t i = 0; i < d; ++i) {
            plus[i] += c_k * delta[i];
            minus[i] -= c_k * delta[i];
        }
        clamp_box(plus);
        clamp_box(minus);
        const double lp = loss(plus);
        const double lm = loss(minus);

        SpsaIteration it;
        it.theta = theta;
        if (!std::isfinite(lp) || !std::isfinite(lm)) {
            it.loss = std::numeric_limits<double>::quiet_NaN();
            it.skipped = true;
            trace.iterations.push_back(std::move(it));
            c_scale *= 0.5;
            continue;
        }

        const double scale = (lp - lm) / (2.0 * c_k);
        std::vector<double> grad(d);
        for (std::size_t i = 0; i < d; ++i) grad[i] = scale * delta[i];

        std::vector<double> next(theta);
        for (std::size_t i = 0; i < d; ++i) next[i] -= a_k * grad[i];
        clamp_box(next);

        std::vector<double> step(d);
        for (std::size_t i = 0; i < d; ++i) step[i] = next[i] - theta[i];

        it.loss = 0.5 * (lp + lm);
        it.step_norm = norm2(step);
        it.grad_norm = norm2(grad);
        trace.iterations.push_back(std::move(it));
        theta = std::move(next);
    }

    const std::size_t best = best_of_trace(trace);
    return {trace.iterations[best].theta, std::move(trace)};
}

std::size_t best_of_trace(const SpsaTrace& trace) {
    require(!trace.iterations.empty(), "best_of_trace: empty trace");
    std::size_t best = trace.iterations.size();
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const auto& it = trace.iterations[i];
        if (it.skipped) continue;
        if (it.loss < best_loss) {
            best_loss = it.loss;
            best = i;
        }
    }
    require(best < trace.iterations.size(), "best_of_trace: every iteration was skipped");
    return best;
}

}  // namespace qwave::spsa
