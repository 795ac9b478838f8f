#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qwave/common.hpp"

namespace qwave::sim {

using complexd = std::complex<double>;

// Desk-scale ceiling: 2^20 amplitudes. Callers may pass a smaller cap.
inline constexpr int kDefaultMaxQubits = 20;

// Dense n-qubit state. Qubit 0 is the least-significant bit of the basis
// index; bitstrings are printed most-significant qubit first.
struct Statevector {
    int n_qubits = 0;
    std::vector<complexd> amp;

    double norm() const;
    std::size_t dim() const { return amp.size(); }
};

enum class GateKind { Ry, Rz, H, Cx, Cz, Barrier, Measure };

struct Gate {
    GateKind kind = GateKind::Barrier;
    std::array<int, 2> q{-1, -1};  // [target] or [control, target]
    double angle = 0.0;            // rotation gates only
    bool noise_exempt = false;

    int arity() const;

    static Gate ry(int target, double theta);
    static Gate rz(int target, double theta);
    static Gate h(int target);
    static Gate cx(int control, int target);
    static Gate cz(int a, int b);
    static Gate barrier();
    static Gate measure_all();
};

// Ordered gate list. Measure gates, if present, must be terminal; this is
// checked when the circuit is run.
struct Circuit {
    int n_qubits = 0;
    std::vector<Gate> gates;

    Circuit() = default;
    explicit Circuit(int n) : n_qubits(n) {}

    void push(const Gate& g);  // validates target indices
    bool has_measure() const;
    std::size_t unitary_gate_count() const;  // excludes barriers and measures
};

// Pauli channel parameters, realized by Monte-Carlo trajectory sampling:
// after every non-exempt unitary gate, each touched qubit independently
// suffers X/Y/Z with probabilities p_x/p_y/p_z (p = p_x+p_y+p_z).
struct NoiseModel {
    double p = 0.0;
    double p_x = 0.0, p_y = 0.0, p_z = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    static NoiseModel depolarizing(double p, std::uint64_t seed = 0);
};

struct Counts {
    std::map<std::string, std::uint64_t> histogram;  // bitstring (MSB first) -> count
    std::uint64_t shots = 0;
    int n_qubits = 0;
};

std::string bitstring(std::uint64_t index, int n_qubits);

Statevector new_zero_state(int n_qubits, int max_qubits = kDefaultMaxQubits);

void apply_gate_inplace(Statevector& state, const Gate& g);
Statevector apply_gate(Statevector state, const Gate& g);

// Deterministic evolution; rejects circuits containing Measure gates.
Statevector run_exact(const Circuit& c, const Statevector& initial);
Statevector run_exact(const Circuit& c);  // from |0...0>

// Shot-based execution from |0...0>. Every shot is one noise trajectory;
// the final state is sampled once in the computational basis. noise absent
// or p == 0 takes the identical sampling path, so the two cases are
// bit-exact for equal seeds.
Counts run_shots(const Circuit& c, std::uint64_t shots,
                 const std::optional<NoiseModel>& noise, std::uint64_t seed);

std::vector<double> exact_probabilities(const Statevector& state);

complexd inner_product(const Statevector& a, const Statevector& b);

// Reversed gate order with negated rotation angles. Rejects Measure gates.
Circuit inverse(const Circuit& c);

// Debug dump: one "index,re,im" row per amplitude.
void write_statevector_csv(const Statevector& state, std::ostream& os);

}  // namespace qwave::sim
