#pragma once

#include <span>
#include <vector>

#include "qwave/qsim.hpp"

namespace qwave::encode {

// Clip bound keeping normalized feature values away from 0 and 1 before the
// arcsin mapping.
inline constexpr double kClipEpsilon = 1e-6;

enum class Scheme { ProductRy, Amplitude };

struct EncodedSample {
    std::vector<double> c;       // normalized values (clipped / L2-normalized)
    std::vector<double> angles;  // ProductRy only
    Scheme scheme = Scheme::ProductRy;
};

// Affine map to [0,1] with externally fitted per-feature bounds. A constant
// feature (max == min) maps to 0.5 with a warning; out-of-range inputs are
// clamped so the output stays in [0,1].
std::vector<double> minmax_normalize(std::span<const double> values,
                                     std::span<const double> feature_min,
                                     std::span<const double> feature_max);

// theta_i = 2 asin(sqrt(c_i)) after clipping c into [eps, 1-eps].
// Entries outside [0,1] by more than 1e-9 are a contract error.
std::vector<double> ry_angles(std::span<const double> c);

EncodedSample encode_product_ry(std::span<const double> c);

// One RY per qubit; |0...0> maps to the product state with P(qubit i = 1)
// equal to the clipped c_i.
sim::Circuit product_ry_prepare(std::span<const double> angles);

// Exact amplitude state preparation for non-negative inputs: pad to a power
// of two, L2-normalize, then emit uniformly controlled RY rotations from a
// binary-tree recursion over subvector norms. Zero-norm subtrees are skipped
// (the sparse fast path). The built circuit is verified against the target to
// eps_prep in the L2 norm.
sim::Circuit amplitude_prepare(std::span<const double> x, double eps_prep = 1e-9,
                               int max_qubits = sim::kDefaultMaxQubits);

// Padded, L2-normalized amplitude target (what amplitude_prepare realizes).
std::vector<double> amplitude_target(std::span<const double> x);

}  // namespace qwave::encode
