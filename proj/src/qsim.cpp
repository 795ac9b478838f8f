#include "qwave/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qwave::sim {

namespace {

// Single-qubit kernels over raw amplitude buffers. The stride loop visits
// every pair of indices differing in bit q. Templated on the scalar so the
// noisy trajectory engine can run in float.
template <typename T>
void kernel_1q(std::complex<T>* a, std::size_t dim, int q,
               std::complex<T> u00, std::complex<T> u01,
               std::complex<T> u10, std::complex<T> u11) {
    const std::size_t step = std::size_t{1} << q;
    const std::size_t block = step << 1;
    for (std::size_t base = 0; base < dim; base += block) {
        for (std::size_t off = 0; off < step; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + step;
            const std::complex<T> x = a[i0], y = a[i1];
            a[i0] = u00 * x + u01 * y;
            a[i1] = u10 * x + u11 * y;
        }
    }
}

template <typename T>
void kernel_h(std::complex<T>* a, std::size_t dim, int q) {
    const T s = static_cast<T>(1.0 / std::sqrt(2.0));
    const std::size_t step = std::size_t{1} << q;
    const std::size_t block = step << 1;
    for (std::size_t base = 0; base < dim; base += block) {
        for (std::size_t off = 0; off < step; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + step;
            const std::complex<T> x = a[i0], y = a[i1];
            a[i0] = (x + y) * s;
            a[i1] = (x - y) * s;
        }
    }
}

template <typename T>
void kernel_ry(std::complex<T>* a, std::size_t dim, int q, double theta) {
    const T c = static_cast<T>(std::cos(theta / 2.0));
    const T s = static_cast<T>(std::sin(theta / 2.0));
    const std::size_t step = std::size_t{1} << q;
    const std::size_t block = step << 1;
    for (std::size_t base = 0; base < dim; base += block) {
        for (std::size_t off = 0; off < step; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + step;
            const std::complex<T> x = a[i0], y = a[i1];
            a[i0] = c * x - s * y;
            a[i1] = s * x + c * y;
        }
    }
}

template <typename T>
void kernel_rz(std::complex<T>* a, std::size_t dim, int q, double theta) {
    const std::complex<T> e0(static_cast<T>(std::cos(theta / 2.0)),
                             static_cast<T>(-std::sin(theta / 2.0)));
    const std::complex<T> e1 = std::conj(e0);
    const std::size_t step = std::size_t{1} << q;
    const std::size_t block = step << 1;
    for (std::size_t base = 0; base < dim; base += block) {
        for (std::size_t off = 0; off < step; ++off) {
            a[base + off] *= e0;
            a[base + off + step] *= e1;
        }
    }
}

template <typename T>
void kernel_cx(std::complex<T>* a, std::size_t dim, int control, int target) {
    const std::size_t cm = std::size_t{1} << control;
    const std::size_t tm = std::size_t{1} << target;
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cm) && !(i & tm)) std::swap(a[i], a[i | tm]);
    }
}

template <typename T>
void kernel_cz(std::complex<T>* a, std::size_t dim, int qa, int qb) {
    const std::size_t mask = (std::size_t{1} << qa) | (std::size_t{1} << qb);
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & mask) == mask) a[i] = -a[i];
    }
}

enum class Pauli { X, Y, Z };

template <typename T>
void kernel_pauli(std::complex<T>* a, std::size_t dim, int q, Pauli which) {
    const std::size_t step = std::size_t{1} << q;
    const std::size_t block = step << 1;
    switch (which) {
        case Pauli::X:
            for (std::size_t base = 0; base < dim; base += block)
                for (std::size_t off = 0; off < step; ++off)
                    std::swap(a[base + off], a[base + off + step]);
            break;
        case Pauli::Y:
            for (std::size_t base = 0; base < dim; base += block)
                for (std::size_t off = 0; off < step; ++off) {
                    const std::complex<T> x = a[base + off];
                    const std::complex<T> y = a[base + off + step];
                    a[base + off] = std::complex<T>(y.imag(), -y.real());
                    a[base + off + step] = std::complex<T>(-x.imag(), x.real());
                }
            break;
        case Pauli::Z:
            for (std::size_t base = 0; base < dim; base += block)
                for (std::size_t off = 0; off < step; ++off)
                    a[base + off + step] = -a[base + off + step];
            break;
    }
}

template <typename T>
void apply_unitary_gate(std::complex<T>* a, std::size_t dim, const Gate& g) {
    switch (g.kind) {
        case GateKind::Ry: kernel_ry(a, dim, g.q[0], g.angle); break;
        case GateKind::Rz: kernel_rz(a, dim, g.q[0], g.angle); break;
        case GateKind::H: kernel_h(a, dim, g.q[0]); break;
        case GateKind::Cx: kernel_cx<T>(a, dim, g.q[0], g.q[1]); break;
        case GateKind::Cz: kernel_cz<T>(a, dim, g.q[0], g.q[1]); break;
        case GateKind::Barrier:
        case GateKind::Measure: break;
    }
}

void check_targets(const Gate& g, int n_qubits) {
    const int arity = g.arity();
    for (int k = 0; k < arity; ++k) {
        if (g.q[k] < 0 || g.q[k] >= n_qubits)
            throw ContractError("gate target index " + std::to_string(g.q[k]) +
                                " out of range for " + std::to_string(n_qubits) + " qubits");
    }
    if (arity == 2 && g.q[0] == g.q[1])
        throw ContractError("two-qubit gate targets must be distinct");
}

}  // namespace

int Gate::arity() const {
    switch (kind) {
        case GateKind::Cx:
        case GateKind::Cz: return 2;
        case GateKind::Barrier:
        case GateKind::Measure: return 0;
        default: return 1;
    }
}

Gate Gate::ry(int target, double theta) { return Gate{GateKind::Ry, {target, -1}, theta, false}; }
Gate Gate::rz(int target, double theta) { return Gate{GateKind::Rz, {target, -1}, theta, false}; }
Gate Gate::h(int target) { return Gate{GateKind::H, {target, -1}, 0.0, false}; }
Gate Gate::cx(int control, int target) { return Gate{GateKind::Cx, {control, target}, 0.0, false}; }
Gate Gate::cz(int a, int b) { return Gate{GateKind::Cz, {a, b}, 0.0, false}; }
Gate Gate::barrier() { return Gate{GateKind::Barrier, {-1, -1}, 0.0, false}; }
Gate Gate::measure_all() { return Gate{GateKind::Measure, {-1, -1}, 0.0, false}; }

void Circuit::push(const Gate& g) {
    check_targets(g, n_qubits);
    gates.push_back(g);
}

bool Circuit::has_measure() const {
    return std::any_of(gates.begin(), gates.end(),
                       [](const Gate& g) { return g.kind == GateKind::Measure; });
}

std::size_t Circuit::unitary_gate_count() const {
    std::size_t n = 0;
    for (const auto& g : gates)
        if (g.kind != GateKind::Barrier && g.kind != GateKind::Measure) ++n;
    return n;
}

double Statevector::norm() const {
    double s = 0.0;
    for (const auto& a : amp) s += std::norm(a);
    return std::sqrt(s);
}

std::string bitstring(std::uint64_t index, int n_qubits) {
    std::string s(n_qubits, '0');
    for (int q = 0; q < n_qubits; ++q)
        if ((index >> q) & 1) s[n_qubits - 1 - q] = '1';
    return s;
}

Statevector new_zero_state(int n_qubits, int max_qubits) {
    if (n_qubits < 1 || n_qubits > max_qubits)
        throw CapacityError("qubit count " + std::to_string(n_qubits) +
                            " outside [1, " + std::to_string(max_qubits) + "]");
    Statevector s;
    s.n_qubits = n_qubits;
    s.amp.assign(std::size_t{1} << n_qubits, complexd(0.0, 0.0));
    s.amp[0] = complexd(1.0, 0.0);
    return s;
}

void apply_gate_inplace(Statevector& state, const Gate& g) {
    check_targets(g, state.n_qubits);
    if (g.kind == GateKind::Measure)
        throw ContractError("Measure gates are handled by run_shots, not gate application");
    apply_unitary_gate(state.amp.data(), state.dim(), g);
}

Statevector apply_gate(Statevector state, const Gate& g) {
    apply_gate_inplace(state, g);
    return state;
}

Statevector run_exact(const Circuit& c, const Statevector& initial) {
    require(c.n_qubits == initial.n_qubits, "circuit and state qubit counts differ");
    if (c.has_measure())
        throw ContractError("run_exact rejects circuits with Measure gates; use run_shots");
    Statevector out = initial;
    for (const auto& g : c.gates) apply_gate_inplace(out, g);
    return out;
}

Statevector run_exact(const Circuit& c) {
    return run_exact(c, new_zero_state(c.n_qubits));
}

std::vector<double> exact_probabilities(const Statevector& state) {
    std::vector<double> p(state.dim());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state.amp[i]);
    return p;
}

complexd inner_product(const Statevector& a, const Statevector& b) {
    require(a.n_qubits == b.n_qubits, "inner product requires equal qubit counts");
    complexd s(0.0, 0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
    return s;
}

Circuit inverse(const Circuit& c) {
    if (c.has_measure()) throw ContractError("cannot invert a circuit with Measure gates");
    Circuit inv(c.n_qubits);
    inv.gates.reserve(c.gates.size());
    for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
        Gate g = *it;
        if (g.kind == GateKind::Ry || g.kind == GateKind::Rz) g.angle = -g.angle;
        inv.gates.push_back(g);
    }
    return inv;
}

void NoiseModel::validate() const {
    require(p >= 0.0 && p <= 1.0, "noise probability p must lie in [0,1]");
    require(p_x >= 0.0 && p_y >= 0.0 && p_z >= 0.0, "per-Pauli probabilities must be >= 0");
    require(std::abs((p_x + p_y + p_z) - p) <= 1e-12, "p_x+p_y+p_z must equal p");
}

NoiseModel NoiseModel::depolarizing(double p, std::uint64_t seed) {
    NoiseModel m;
    m.p = p;
    m.p_x = m.p_y = m.p_z = p / 3.0;
    m.seed = seed;
    return m;
}

namespace {

// One-pass sample from an unnormalized weight vector.
template <typename T>
std::size_t sample_index(const std::complex<T>* a, std::size_t dim, double u) {
    double total = 0.0;
    for (std::size_t i = 0; i < dim; ++i) total += std::norm(a[i]);
    double target = u * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        cum += std::norm(a[i]);
        if (target < cum) return i;
    }
    return dim - 1;
}

std::size_t sample_index(const std::vector<double>& probs, double u) {
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    return probs.size() - 1;
}

void check_measure_terminal(const Circuit& c) {
    bool seen = false;
    for (const auto& g : c.gates) {
        if (g.kind == GateKind::Measure) {
            seen = true;
        } else if (seen && g.kind != GateKind::Barrier) {
            throw ContractError("Measure gates must be terminal");
        }
    }
}

using complexf = std::complex<float>;

// Flattened (gate, qubit) slots where a Pauli error may be inserted.
struct NoisePoint {
    std::uint32_t gate;
    std::uint8_t qubit;
};

std::vector<NoisePoint> collect_noise_points(const Circuit& c,
                                             std::vector<std::size_t>& first_point_of_gate) {
    std::vector<NoisePoint> pts;
    first_point_of_gate.assign(c.gates.size() + 1, 0);
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
        first_point_of_gate[gi] = pts.size();
        const Gate& g = c.gates[gi];
        if (g.kind == GateKind::Barrier || g.kind == GateKind::Measure || g.noise_exempt)
            continue;
        for (int k = 0; k < g.arity(); ++k)
            pts.push_back({static_cast<std::uint32_t>(gi), static_cast<std::uint8_t>(g.q[k])});
    }
    first_point_of_gate[c.gates.size()] = pts.size();
    return pts;
}

}  // namespace

Counts run_shots(const Circuit& c, std::uint64_t shots,
                 const std::optional<NoiseModel>& noise, std::uint64_t seed) {
    require(shots >= 1, "run_shots needs at least one shot");
    check_measure_terminal(c);
    if (noise) noise->validate();

    Counts out;
    out.n_qubits = c.n_qubits;
    out.shots = shots;

    Circuit unitary_part(c.n_qubits);
    for (const auto& g : c.gates)
        if (g.kind != GateKind::Measure) unitary_part.gates.push_back(g);

    const std::size_t dim = std::size_t{1} << c.n_qubits;
    std::vector<std::uint64_t> tally(dim, 0);

    const bool noiseless = !noise || noise->p == 0.0;
    std::mt19937_64 rng(noiseless ? mix_seed(seed, 0) : mix_seed(seed, noise->seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    if (noiseless) {
        // Identical path for "no noise" and "p = 0": one exact evolution,
        // then independent basis samples.
        Statevector fin = run_exact(unitary_part, new_zero_state(c.n_qubits));
        std::vector<double> probs = exact_probabilities(fin);
        for (std::uint64_t s = 0; s < shots; ++s)
            ++tally[sample_index(probs, unif(rng))];
    } else {
        const NoiseModel& nm = *noise;
        std::vector<std::size_t> first_point_of_gate;
        std::vector<NoisePoint> pts = collect_noise_points(unitary_part, first_point_of_gate);
        const std::size_t n_points = pts.size();
        const double log_keep = std::log1p(-std::min(nm.p, 1.0 - 1e-16));

        // Clean forward pass with per-gate checkpoints: a trajectory whose
        // first insertion lands after gate g resumes from checkpoint[g].
        std::vector<std::vector<complexf>> checkpoint(unitary_part.gates.size() + 1);
        {
            Statevector s = new_zero_state(c.n_qubits);
            checkpoint[0].assign(s.amp.begin(), s.amp.end());
            for (std::size_t gi = 0; gi < unitary_part.gates.size(); ++gi) {
                apply_gate_inplace(s, unitary_part.gates[gi]);
                checkpoint[gi + 1].assign(s.amp.begin(), s.amp.end());
            }
        }
        const std::vector<complexf>& clean_final = checkpoint[unitary_part.gates.size()];

        auto next_gap = [&]() -> std::size_t {
            if (nm.p >= 1.0) return 0;
            const double u = unif(rng);
            return static_cast<std::size_t>(std::log1p(-u) / log_keep);
        };
        auto pick_pauli = [&]() -> Pauli {
            const double u = unif(rng) * nm.p;
            if (u < nm.p_x) return Pauli::X;
            if (u < nm.p_x + nm.p_y) return Pauli::Y;
            return Pauli::Z;
        };

        std::vector<complexf> work(dim);
        for (std::uint64_t s = 0; s < shots; ++s) {
            std::size_t pt = next_gap();
            if (pt >= n_points) {
                ++tally[sample_index(clean_final.data(), dim, unif(rng))];
                continue;
            }
            const std::size_t fork_gate = pts[pt].gate;
            work = checkpoint[fork_gate + 1];
            kernel_pauli(work.data(), dim, pts[pt].qubit, pick_pauli());
            std::size_t done_gate = fork_gate;  // gates [0, done_gate] applied
            for (;;) {
                pt += 1 + next_gap();
                if (pt >= n_points) break;
                for (std::size_t gi = done_gate + 1; gi <= pts[pt].gate; ++gi)
                    apply_unitary_gate(work.data(), dim, unitary_part.gates[gi]);
                done_gate = pts[pt].gate;
                kernel_pauli(work.data(), dim, pts[pt].qubit, pick_pauli());
            }
            for (std::size_t gi = done_gate + 1; gi < unitary_part.gates.size(); ++gi)
                apply_unitary_gate(work.data(), dim, unitary_part.gates[gi]);
            ++tally[sample_index(work.data(), dim, unif(rng))];
        }
    }

    for (std::size_t i = 0; i < dim; ++i)
        if (tally[i] > 0) out.histogram[bitstring(i, c.n_qubits)] = tally[i];
    return out;
}

void write_statevector_csv(const Statevector& state, std::ostream& os) {
    os << "index,re,im\n";
    for (std::size_t i = 0; i < state.dim(); ++i)
        os << i << ',' << state.amp[i].real() << ',' << state.amp[i].imag() << '\n';
}

}  // namespace qwave::sim
