#include "qwave/qwpt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qwave::qwpt {

namespace {

void check_config(const QwptConfig& cfg) {
    require(cfg.n_qubits >= 2, "qwpt needs at least 2 qubits");
    require(cfg.levels >= 1, "qwpt needs at least one level");
    require(cfg.levels <= cfg.n_qubits - 1,
            "levels must not exceed n_qubits - 1 (got h=" + std::to_string(cfg.levels) +
                ", n=" + std::to_string(cfg.n_qubits) + ")");
}

constexpr double kDegenerateEnergy = 1e-12;

}  // namespace

sim::Circuit build_qwpt_circuit(const QwptConfig& cfg) {
    check_config(cfg);
    sim::Circuit circ(cfg.n_qubits);
    for (int level = 0; level < cfg.levels; ++level) {
        const int stride = 1 << level;
        circ.push(sim::Gate::barrier());
        for (int j = 0; j + stride < cfg.n_qubits; ++j) {
            if ((j >> level) & 1) continue;
            circ.push(sim::Gate::cx(j, j + stride));
            circ.push(sim::Gate::h(j));
            if (cfg.use_rz_phase)
                circ.push(sim::Gate::rz(j + stride, std::numbers::pi / 4.0));
        }
    }
    return circ;
}

sim::Circuit build_butterfly_circuit(int n_qubits, int levels, bool use_rz_phase) {
    QwptConfig probe;
    probe.n_qubits = n_qubits;
    probe.levels = levels;
    check_config(probe);
    sim::Circuit circ(n_qubits);
    for (int level = 0; level < levels; ++level) {
        circ.push(sim::Gate::barrier());
        circ.push(sim::Gate::h(level));
        if (use_rz_phase) circ.push(sim::Gate::rz(level, std::numbers::pi / 4.0));
    }
    return circ;
}

WptFeatures features_from_probabilities(std::vector<double> probs, int levels) {
    require(!probs.empty() && (probs.size() & (probs.size() - 1)) == 0,
            "probability vector length must be a power of two");
    int n = 0;
    while ((std::size_t{1} << n) < probs.size()) ++n;
    require(levels >= 1 && levels <= n - 1, "invalid level count for feature split");

    double total = 0.0;
    for (double p : probs) {
        require(p >= -1e-12, "negative probability mass");
        total += p;
    }
    require(total > 0.0, "all-zero probability vector");
    for (double& p : probs) p = std::max(p, 0.0) / total;

    WptFeatures out;
    out.f = std::move(probs);
    const int block = n - levels;
    out.subband_energy.assign(std::size_t{1} << levels, 0.0);
    for (std::size_t i = 0; i < out.f.size(); ++i)
        out.subband_energy[i >> block] += out.f[i];

    out.wpee = 0.0;
    for (double e : out.subband_energy)
        if (e > 0.0) out.wpee -= e * std::log(e);
    return out;
}

WptFeatures run_qwpt(const encode::EncodedSample& sample, const QwptConfig& cfg) {
    check_config(cfg);
    require(sample.scheme == encode::Scheme::ProductRy, "run_qwpt expects a ProductRy sample");
    require(static_cast<int>(sample.angles.size()) == cfg.n_qubits,
            "sample angle count must equal the qubit count");

    sim::Circuit circ = encode::product_ry_prepare(sample.angles);
    const sim::Circuit transform = cfg.style == CircuitStyle::PaperPairs
                                       ? build_qwpt_circuit(cfg)
                                       : build_butterfly_circuit(cfg.n_qubits, cfg.levels,
                                                                 cfg.use_rz_phase);
    for (const auto& g : transform.gates) circ.push(g);

    std::vector<double> probs;
    if (cfg.execution == ExecutionMode::ExactAmplitudes) {
        probs = sim::exact_probabilities(sim::run_exact(circ));
    } else {
        require(cfg.shots >= 1, "shot execution needs at least one shot");
        circ.push(sim::Gate::measure_all());
        sim::Counts counts = sim::run_shots(circ, cfg.shots, std::nullopt, cfg.seed);
        probs.assign(std::size_t{1} << cfg.n_qubits, 0.0);
        for (const auto& [bits, c] : counts.histogram) {
            std::size_t idx = 0;
            for (char b : bits) idx = (idx << 1) | (b == '1');
            probs[idx] = static_cast<double>(c) / static_cast<double>(counts.shots);
        }
    }
    return features_from_probabilities(std::move(probs), cfg.levels);
}

PacketTree classical_haar_wpt(std::span<const double> signal, int levels) {
    require(!signal.empty() && (signal.size() & (signal.size() - 1)) == 0,
            "signal length must be a power of two");
    int m = 0;
    while ((std::size_t{1} << m) < signal.size()) ++m;
    require(levels >= 1 && levels <= m, "levels must lie in [1, log2(len)]");

    constexpr double inv_sqrt2 = 0.70710678118654752440;
    PacketTree tree;
    tree.levels = levels;
    tree.nodes.resize(levels + 1);
    tree.nodes[0].push_back(std::vector<double>(signal.begin(), signal.end()));
    for (int l = 0; l < levels; ++l) {
        for (const auto& node : tree.nodes[l]) {
            const std::size_t half = node.size() / 2;
            std::vector<double> approx(half), detail(half);
            for (std::size_t k = 0; k < half; ++k) {
                approx[k] = (node[2 * k] + node[2 * k + 1]) * inv_sqrt2;
                detail[k] = (node[2 * k] - node[2 * k + 1]) * inv_sqrt2;
            }
            tree.nodes[l + 1].push_back(std::move(approx));
            tree.nodes[l + 1].push_back(std::move(detail));
        }
    }
    return tree;
}

std::vector<double> PacketTree::inplace_vector() const {
    const auto& lv = leaves();
    const std::size_t n_leaves = lv.size();
    const std::size_t leaf_len = lv[0].size();
    std::vector<double> out(n_leaves * leaf_len);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t leaf = 0;
        for (int l = 0; l < levels; ++l) leaf = (leaf << 1) | ((i >> l) & 1);
        out[i] = lv[leaf][i >> levels];
    }
    return out;
}

double validate_qwpt_against_classical(const std::vector<std::vector<double>>& samples,
                                       const QwptConfig& cfg) {
    require(!samples.empty(), "validation needs at least one sample");
    double total_err = 0.0;
    for (const auto& x : samples) {
        const std::vector<double> target = encode::amplitude_target(x);
        int n = 0;
        while ((std::size_t{1} << n) < target.size()) ++n;
        require(n == cfg.n_qubits, "sample dimension does not match cfg.n_qubits");

        sim::Circuit circ = encode::amplitude_prepare(x);
        const sim::Circuit transform =
            build_butterfly_circuit(n, cfg.levels, cfg.use_rz_phase);
        for (const auto& g : transform.gates) circ.push(g);
        const sim::Statevector out = sim::run_exact(circ);

        const std::vector<double> ref =
            classical_haar_wpt(target, cfg.levels).inplace_vector();
        double err2 = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i)
            err2 += std::norm(out.amp[i] - sim::complexd(ref[i], 0.0));
        total_err += std::sqrt(err2);
    }
    return total_err / static_cast<double>(samples.size());
}

namespace {

// Re-encoding rule for a half-block of probability mass: a branch whose
// energy is below the degenerate threshold becomes the uniform vector and is
// used as-is; otherwise the branch is renormalized and min-max rescaled into
// [0,1] before the RY mapping.
std::vector<double> child_encoding_values(std::span<const double> half) {
    double total = 0.0;
    for (double v : half) total += v;
    if (total < kDegenerateEnergy)
        return std::vector<double>(half.size(), 1.0 / static_cast<double>(half.size()));
    std::vector<double> w(half.begin(), half.end());
    for (double& v : w) v /= total;
    const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
    if (*mx == *mn) return std::vector<double>(w.size(), 0.5);
    for (double& v : w) v = (v - *mn) / (*mx - *mn);
    return w;
}

void recursive_decompose_into(const encode::EncodedSample& sample, const QwptConfig& cfg,
                              std::vector<WptFeatures>& out) {
    QwptConfig level_cfg = cfg;
    level_cfg.levels = 1;
    WptFeatures node = run_qwpt(sample, level_cfg);
    const std::size_t half = node.f.size() / 2;
    std::vector<double> approx(node.f.begin(), node.f.begin() + half);
    std::vector<double> detail(node.f.begin() + half, node.f.end());
    out.push_back(std::move(node));
    if (cfg.levels == 1) return;

    const int child_qubits = static_cast<int>(half);
    require(child_qubits <= sim::kDefaultMaxQubits,
            "recursive decomposition exceeds the qubit budget");
    for (const auto& branch : {approx, detail}) {
        QwptConfig child_cfg = cfg;
        child_cfg.n_qubits = child_qubits;
        child_cfg.levels = cfg.levels - 1;
        child_cfg.seed = mix_seed(cfg.seed, out.size());
        const encode::EncodedSample child =
            encode::encode_product_ry(child_encoding_values(branch));
        recursive_decompose_into(child, child_cfg, out);
    }
}

}  // namespace

std::vector<WptFeatures> recursive_decompose(const encode::EncodedSample& sample,
                                             const QwptConfig& cfg) {
    check_config(cfg);
    std::vector<WptFeatures> out;
    recursive_decompose_into(sample, cfg, out);
    return out;
}

}  // namespace qwave::qwpt
