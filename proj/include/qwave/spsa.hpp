#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "qwave/common.hpp"

namespace qwave::spsa {

struct SpsaConfig {
    double perturbation = 0.05;   // c0 (Pr)
    double learning_rate = 0.5;   // a0 (Lr)
    int iterations = 10;
    double alpha_gain = 0.602;    // step decay exponent
    double gamma_gain = 0.101;    // perturbation decay exponent
    std::uint64_t seed = 0;
};

struct SpsaIteration {
    std::vector<double> theta;  // snapshot before this iteration's update
    double loss = 0.0;          // mean of the two probe evaluations at theta
    double step_norm = 0.0;
    double grad_norm = 0.0;
    bool skipped = false;       // non-finite probe; theta was left in place
};

struct SpsaTrace {
    std::vector<SpsaIteration> iterations;
};

using LossFn = std::function<double(std::span<const double>)>;

// Two-sided SPSA over the box [-pi, pi]^d: per iteration one Rademacher
// direction, two probe evaluations, gradient estimate
// (L+ - L-) / (2 c_k) * delta, gains a_k = Lr/(k+1)^alpha and
// c_k = Pr/(k+1)^gamma. A non-finite probe skips the iteration and halves the
// perturbation scale from then on. Returns the theta snapshot with the best
// recorded loss (not necessarily the last) plus the full trace. Exactly two
// loss evaluations happen per iteration.
std::pair<std::vector<double>, SpsaTrace> spsa_minimize(const LossFn& loss,
                                                        std::span<const double> theta0,
                                                        const SpsaConfig& cfg);

// Argmin of recorded (non-skipped) losses; first index on ties.
std::size_t best_of_trace(const SpsaTrace& trace);

}  // namespace qwave::spsa
