#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qwave/encode.hpp"
#include "qwave/qsim.hpp"

namespace qwave::qwpt {

// Two circuit realizations are exposed.
//
// PaperPairs is the literal pair schedule: at level l, every qubit pair
// (q_j, q_{j+2^l}) with bit l of j clear gets CX(q_j, q_{j+2^l}), H(q_j) and
// optionally RZ(pi/4) on the partner. This is the schedule the pipeline's
// feature path uses.
//
// HaarButterfly applies H on qubit l at level l, which is the in-place Haar
// packet transform on the amplitude vector: its pre-measurement amplitudes
// coincide with classical_haar_wpt coefficients (rz off). The CX-based
// schedule is a different unitary and does not have that property, so the
// classical-equivalence validator runs on this style.
enum class CircuitStyle { PaperPairs, HaarButterfly };

enum class ExecutionMode { ExactAmplitudes, Shots };

struct QwptConfig {
    int n_qubits = 0;
    int levels = 2;
    bool use_rz_phase = true;
    CircuitStyle style = CircuitStyle::PaperPairs;
    ExecutionMode execution = ExecutionMode::ExactAmplitudes;
    std::uint64_t shots = 8192;
    std::uint64_t seed = 0;
};

struct WptFeatures {
    std::vector<double> f;               // probability-normalized, length 2^n
    std::vector<double> subband_energy;  // E^(t), length 2^levels, sums to 1
    double wpee = 0.0;                   // -sum P ln P over sub-bands
};

sim::Circuit build_qwpt_circuit(const QwptConfig& cfg);
sim::Circuit build_butterfly_circuit(int n_qubits, int levels, bool use_rz_phase = false);

// Sub-band split of a probability vector: block t holds the indices whose
// top `levels` bits equal t. wpee uses the natural log.
WptFeatures features_from_probabilities(std::vector<double> probs, int levels);

WptFeatures run_qwpt(const encode::EncodedSample& sample, const QwptConfig& cfg);

// Full Haar packet tree: nodes[l] holds the 2^l coefficient vectors at level
// l (node children ordered approximation first). Filters are the orthonormal
// pair (1/sqrt2, 1/sqrt2) and (1/sqrt2, -1/sqrt2); total energy is preserved.
struct PacketTree {
    int levels = 0;
    std::vector<std::vector<std::vector<double>>> nodes;

    const std::vector<std::vector<double>>& leaves() const { return nodes.back(); }

    // Leaf coefficients arranged in the in-place layout produced by the
    // butterfly circuit: at index i, the branch taken at level l is bit l of
    // i and the position inside the leaf is i >> levels.
    std::vector<double> inplace_vector() const;
};

PacketTree classical_haar_wpt(std::span<const double> signal, int levels);

// Mean L2 distance between butterfly-circuit amplitudes and the classical
// packet coefficients of the prepared state, over amplitude-encoded samples.
double validate_qwpt_against_classical(const std::vector<std::vector<double>>& samples,
                                       const QwptConfig& cfg);

// One-level transform, split into approximation / detail half-blocks, then
// re-encode and recurse on both halves until the level budget is spent.
// Output is in preorder: node, then its A subtree, then its D subtree.
std::vector<WptFeatures> recursive_decompose(const encode::EncodedSample& sample,
                                             const QwptConfig& cfg);

}  // namespace qwave::qwpt
