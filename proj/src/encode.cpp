#include "qwave/encode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qwave::encode {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

constexpr double kAngleTiny = 1e-14;

// Uniformly controlled RY decomposed into {RY, CX} by the averaging identity
//   mux(a) = CX(c,t) mux((a0-a1)/2) CX(c,t) mux((a0+a1)/2)
// applied to the leading control. A difference branch that is uniformly zero
// collapses, which skips zero-norm subtrees entirely.
void emit_multiplexed_ry(sim::Circuit& circ, std::vector<double> angles,
                         std::span<const int> controls, int target) {
    if (controls.empty()) {
        if (std::abs(angles[0]) > kAngleTiny) circ.push(sim::Gate::ry(target, angles[0]));
        return;
    }
    const std::size_t half = angles.size() / 2;
    std::vector<double> sum(half), diff(half);
    bool diff_zero = true;
    for (std::size_t i = 0; i < half; ++i) {
        sum[i] = 0.5 * (angles[i] + angles[half + i]);
        diff[i] = 0.5 * (angles[i] - angles[half + i]);
        if (std::abs(diff[i]) > kAngleTiny) diff_zero = false;
    }
    const auto rest = controls.subspan(1);
    if (diff_zero) {
        emit_multiplexed_ry(circ, std::move(sum), rest, target);
        return;
    }
    circ.push(sim::Gate::cx(controls[0], target));
    emit_multiplexed_ry(circ, std::move(diff), rest, target);
    circ.push(sim::Gate::cx(controls[0], target));
    emit_multiplexed_ry(circ, std::move(sum), rest, target);
}

}  // namespace

std::vector<double> minmax_normalize(std::span<const double> values,
                                     std::span<const double> feature_min,
                                     std::span<const double> feature_max) {
    require(values.size() == feature_min.size() && values.size() == feature_max.size(),
            "minmax_normalize: bounds must match the feature count");
    require(all_finite(values), "minmax_normalize: non-finite feature value");
    std::vector<double> out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double lo = feature_min[j], hi = feature_max[j];
        require(hi >= lo, "minmax_normalize: feature max below min");
        if (hi == lo) {
            warn("encode", "constant feature " + std::to_string(j) + " mapped to 0.5");
            out[j] = 0.5;
        } else {
            out[j] = std::clamp((values[j] - lo) / (hi - lo), 0.0, 1.0);
        }
    }
    return out;
}

std::vector<double> ry_angles(std::span<const double> c) {
    std::vector<double> angles(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        require(c[i] > -1e-9 && c[i] < 1.0 + 1e-9,
                "ry_angles: value " + std::to_string(c[i]) + " outside [0,1]");
        const double clipped = std::clamp(c[i], kClipEpsilon, 1.0 - kClipEpsilon);
        angles[i] = 2.0 * std::asin(std::sqrt(clipped));
    }
    return angles;
}

EncodedSample encode_product_ry(std::span<const double> c) {
    EncodedSample s;
    s.scheme = Scheme::ProductRy;
    s.c.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        s.c[i] = std::clamp(c[i], kClipEpsilon, 1.0 - kClipEpsilon);
    s.angles = ry_angles(c);
    return s;
}

sim::Circuit product_ry_prepare(std::span<const double> angles) {
    require(!angles.empty(), "product_ry_prepare: need at least one angle");
    sim::Circuit circ(static_cast<int>(angles.size()));
    for (std::size_t i = 0; i < angles.size(); ++i)
        circ.push(sim::Gate::ry(static_cast<int>(i), angles[i]));
    return circ;
}

std::vector<double> amplitude_target(std::span<const double> x) {
    require(!x.empty(), "amplitude encoding: empty input");
    require(all_finite(x), "amplitude encoding: non-finite input");
    std::vector<double> v(x.begin(), x.end());
    for (double e : v)
        require(e >= 0.0, "amplitude encoding is restricted to non-negative inputs");
    v.resize(std::max<std::size_t>(next_pow2(v.size()), 2), 0.0);
    double n2 = 0.0;
    for (double e : v) n2 += e * e;
    require(n2 > 0.0, "amplitude encoding: zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (double& e : v) e *= inv;
    return v;
}

sim::Circuit amplitude_prepare(std::span<const double> x, double eps_prep, int max_qubits) {
    const std::vector<double> v = amplitude_target(x);
    int n_qubits = 0;
    while ((std::size_t{1} << n_qubits) < v.size()) ++n_qubits;
    if (n_qubits > max_qubits)
        throw CapacityError("amplitude_prepare: input needs " + std::to_string(n_qubits) +
                            " qubits, cap is " + std::to_string(max_qubits));

    // Subtree norms: norms[d] has 2^d entries, the L2 norm of each segment at
    // depth d. Branch angles come from the child-norm split.
    std::vector<std::vector<double>> norms(n_qubits + 1);
    norms[n_qubits].resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) norms[n_qubits][i] = v[i];
    for (int d = n_qubits - 1; d >= 0; --d) {
        norms[d].resize(std::size_t{1} << d);
        for (std::size_t i = 0; i < norms[d].size(); ++i)
            norms[d][i] = std::hypot(norms[d + 1][2 * i], norms[d + 1][2 * i + 1]);
    }

    sim::Circuit circ(n_qubits);
    std::vector<int> controls;
    for (int d = 0; d < n_qubits; ++d) {
        std::vector<double> angles(std::size_t{1} << d, 0.0);
        for (std::size_t i = 0; i < angles.size(); ++i) {
            const double left = norms[d + 1][2 * i], right = norms[d + 1][2 * i + 1];
            if (left + right > 0.0) angles[i] = 2.0 * std::atan2(right, left);
        }
        emit_multiplexed_ry(circ, std::move(angles), controls, n_qubits - 1 - d);
        controls.push_back(n_qubits - 1 - d);
    }

    const sim::Statevector prepared = sim::run_exact(circ);
    double err2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) err2 += std::norm(prepared.amp[i] - sim::complexd(v[i], 0.0));
    internal_check(std::sqrt(err2) <= eps_prep,
                   "amplitude_prepare missed its tolerance: err=" + std::to_string(std::sqrt(err2)));
    return circ;
}

}  // namespace qwave::encode
