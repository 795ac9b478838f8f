#include "qwave/qkernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qwave::kernel {

namespace {

std::vector<double> row_vec(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> v(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[j] = m(r, j);
    return v;
}

}  // namespace

FeatureMapSpec FeatureMapSpec::zz(int n_qubits, int reps) {
    FeatureMapSpec s;
    s.kind = MapKind::Zz;
    s.n_qubits = n_qubits;
    s.reps = reps;
    s.validate();
    return s;
}

FeatureMapSpec FeatureMapSpec::phase(int n_qubits) {
    FeatureMapSpec s;
    s.kind = MapKind::Phase;
    s.n_qubits = n_qubits;
    s.reps = 1;
    s.validate();
    return s;
}

FeatureMapSpec FeatureMapSpec::trainable(std::vector<double> theta, int reps) {
    FeatureMapSpec s;
    s.kind = MapKind::TrainableZz;
    s.n_qubits = static_cast<int>(theta.size());
    s.reps = reps;
    s.theta = std::move(theta);
    s.validate();
    return s;
}

void FeatureMapSpec::validate() const {
    require(n_qubits >= 1, "feature map needs at least one qubit");
    require(reps >= 1, "feature map reps must be >= 1");
    if (kind == MapKind::TrainableZz)
        require(static_cast<int>(theta.size()) == n_qubits,
                "trainable map needs one theta per qubit");
}

std::string FeatureMapSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case MapKind::Zz: os << "zz(reps=" << reps << ")"; break;
        case MapKind::Phase: os << "phase"; break;
        case MapKind::TrainableZz:
            os << "trainable_zz(reps=" << reps << ",theta=";
            for (std::size_t i = 0; i < theta.size(); ++i)
                os << (i ? ";" : "") << theta[i];
            os << ")";
            break;
    }
    os << " n=" << n_qubits;
    return os.str();
}

sim::Circuit zz_feature_map(std::span<const double> x, int reps) {
    require(!x.empty(), "zz_feature_map: empty input");
    require(reps >= 1, "zz_feature_map: reps must be >= 1");
    const int n = static_cast<int>(x.size());
    sim::Circuit circ(n);
    for (int r = 0; r < reps; ++r) {
        for (int q = 0; q < n; ++q) circ.push(sim::Gate::h(q));
        for (int q = 0; q < n; ++q) circ.push(sim::Gate::rz(q, 2.0 * x[q]));
        for (int q = 0; q + 1 < n; ++q) {
            circ.push(sim::Gate::cx(q, q + 1));
            circ.push(sim::Gate::rz(
                q + 1, 2.0 * (std::numbers::pi - x[q]) * (std::numbers::pi - x[q + 1])));
            circ.push(sim::Gate::cx(q, q + 1));
        }
    }
    return circ;
}

sim::Circuit phase_feature_map(std::span<const double> x) {
    require(!x.empty(), "phase_feature_map: empty input");
    const int n = static_cast<int>(x.size());
    sim::Circuit circ(n);
    if (n > 1)
        for (int q = 0; q < n; ++q) circ.push(sim::Gate::cx(q, (q + 1) % n));
    for (int q = 0; q < n; ++q) circ.push(sim::Gate::ry(q, std::numbers::pi * x[q]));
    for (int q = 0; q < n; ++q) circ.push(sim::Gate::h(q));
    for (int q = 0; q < n; ++q) circ.push(sim::Gate::rz(q, std::numbers::pi * x[q]));
    for (int q = 0; q < n; ++q) circ.push(sim::Gate::h(q));
    return circ;
}

sim::Circuit trainable_feature_map(std::span<const double> theta,
                                   std::span<const double> x, int reps) {
    require(theta.size() == x.size(), "trainable map: theta and x sizes differ");
    sim::Circuit circ(static_cast<int>(x.size()));
    for (std::size_t q = 0; q < theta.size(); ++q)
        circ.push(sim::Gate::ry(static_cast<int>(q), theta[q]));
    const sim::Circuit zz = zz_feature_map(x, reps);
    for (const auto& g : zz.gates) circ.push(g);
    return circ;
}

sim::Circuit feature_map_circuit(const FeatureMapSpec& map, std::span<const double> x) {
    map.validate();
    require(static_cast<int>(x.size()) == map.n_qubits,
            "feature map input dimension must equal the qubit count");
    switch (map.kind) {
        case MapKind::Zz: return zz_feature_map(x, map.reps);
        case MapKind::Phase: return phase_feature_map(x);
        case MapKind::TrainableZz: return trainable_feature_map(map.theta, x, map.reps);
    }
    throw InternalError("unknown feature map kind");
}

double fidelity_exact(const sim::Statevector& a, const sim::Statevector& b) {
    return std::norm(sim::inner_product(a, b));
}

double fidelity_exact(const FeatureMapSpec& map, std::span<const double> xi,
                      std::span<const double> xj) {
    const sim::Statevector si = sim::run_exact(feature_map_circuit(map, xi));
    const sim::Statevector sj = sim::run_exact(feature_map_circuit(map, xj));
    return fidelity_exact(si, sj);
}

double fidelity_compute_uncompute(const FeatureMapSpec& map, std::span<const double> xi,
                                  std::span<const double> xj, std::uint64_t shots,
                                  const std::optional<sim::NoiseModel>& noise,
                                  std::uint64_t seed) {
    require(shots >= 1, "compute-uncompute needs at least one shot");
    sim::Circuit circ = feature_map_circuit(map, xj);
    const sim::Circuit undo = sim::inverse(feature_map_circuit(map, xi));
    for (const auto& g : undo.gates) circ.push(g);
    circ.push(sim::Gate::measure_all());
    const sim::Counts counts = sim::run_shots(circ, shots, noise, seed);
    const std::string zeros(circ.n_qubits, '0');
    const auto it = counts.histogram.find(zeros);
    const std::uint64_t hits = it == counts.histogram.end() ? 0 : it->second;
    return static_cast<double>(hits) / static_cast<double>(shots);
}

KernelMatrix kernel_matrix(const FeatureMapSpec& map, const Eigen::MatrixXd& x,
                           const KernelExecOptions& opts) {
    map.validate();
    require(x.rows() >= 1, "kernel_matrix: empty dataset");
    require(x.cols() == map.n_qubits, "kernel_matrix: row dimension mismatch");
    const Eigen::Index n = x.rows();

    KernelMatrix k;
    k.values.resize(n, n);
    k.meta.map = map.describe();
    k.meta.exact = opts.exact;
    k.meta.shots = opts.exact ? 0 : opts.shots;
    k.meta.noise_p = opts.noise ? opts.noise->p : 0.0;
    k.meta.seed = opts.seed;

    if (opts.exact) {
        std::vector<sim::Statevector> states(n);
        parallel_for(n, opts.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r)
                states[r] = sim::run_exact(feature_map_circuit(map, row_vec(x, r)));
        });
        std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
        pairs.reserve(n * (n - 1) / 2);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        parallel_for(pairs.size(), opts.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t t = lo; t < hi; ++t) {
                const auto [i, j] = pairs[t];
                const double v = fidelity_exact(states[i], states[j]);
                k.values(i, j) = v;
                k.values(j, i) = v;
            }
        });
        for (Eigen::Index i = 0; i < n; ++i) k.values(i, i) = 1.0;
    } else {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
        pairs.reserve(n * (n + 1) / 2);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j) pairs.emplace_back(i, j);
        parallel_for(pairs.size(), opts.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t t = lo; t < hi; ++t) {
                const auto [i, j] = pairs[t];
                const double v = fidelity_compute_uncompute(
                    map, row_vec(x, i), row_vec(x, j), opts.shots, opts.noise,
                    mix_seed(opts.seed, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j)));
                k.values(i, j) = v;
                if (i != j) k.values(j, i) = v;
            }
        });
    }
    return k;
}

Eigen::MatrixXd kernel_rows(const FeatureMapSpec& map, const Eigen::MatrixXd& rows,
                            const Eigen::MatrixXd& cols, const KernelExecOptions& opts,
                            std::uint64_t row_seed_offset) {
    map.validate();
    require(rows.cols() == map.n_qubits && cols.cols() == map.n_qubits,
            "kernel_rows: dimension mismatch");
    Eigen::MatrixXd out(rows.rows(), cols.rows());

    if (opts.exact) {
        std::vector<sim::Statevector> row_states(rows.rows()), col_states(cols.rows());
        parallel_for(rows.rows(), opts.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r)
                row_states[r] = sim::run_exact(feature_map_circuit(map, row_vec(rows, r)));
        });
        parallel_for(cols.rows(), opts.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t c = lo; c < hi; ++c)
                col_states[c] = sim::run_exact(feature_map_circuit(map, row_vec(cols, c)));
        });
        parallel_for(rows.rows(), opts.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r)
                for (Eigen::Index c = 0; c < cols.rows(); ++c)
                    out(r, c) = fidelity_exact(row_states[r], col_states[c]);
        });
    } else {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
        cells.reserve(rows.rows() * cols.rows());
        for (Eigen::Index r = 0; r < rows.rows(); ++r)
            for (Eigen::Index c = 0; c < cols.rows(); ++c) cells.emplace_back(r, c);
        parallel_for(cells.size(), opts.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t t = lo; t < hi; ++t) {
                const auto [r, c] = cells[t];
                out(r, c) = fidelity_compute_uncompute(
                    map, row_vec(rows, r), row_vec(cols, c), opts.shots, opts.noise,
                    mix_seed(opts.seed, row_seed_offset + static_cast<std::uint64_t>(r),
                             static_cast<std::uint64_t>(c)));
            }
        });
    }
    return out;
}

double composite_kernel(std::span<const double> xi, std::span<const double> xj,
                        double alpha, double gamma_rbf, const FeatureMapSpec& map) {
    require(alpha >= 0.0 && alpha <= 1.0, "composite kernel: alpha must lie in [0,1]");
    require(gamma_rbf > 0.0, "composite kernel: gamma must be positive");
    require(xi.size() == xj.size(), "composite kernel: dimension mismatch");
    double d2 = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const double d = xi[k] - xj[k];
        d2 += d * d;
    }
    const double rbf = std::exp(-gamma_rbf * d2);
    const double quantum = fidelity_exact(map, xi, xj);
    return alpha * rbf + (1.0 - alpha) * quantum;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

KernelMatrix psd_repair(const KernelMatrix& k) {
    const Eigen::MatrixXd& m = k.values;
    require(m.rows() == m.cols(), "psd_repair: matrix must be square");
    require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-8,
            "psd_repair: input must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd repaired =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    repaired = 0.5 * (repaired + repaired.transpose());

    KernelMatrix out;
    out.values = std::move(repaired);
    out.meta = k.meta;
    out.meta.psd_repaired = true;
    out.meta.psd_shift_fro = (out.values - m).norm();
    return out;
}

void write_kernel_csv(const KernelMatrix& k, std::ostream& os) {
    os << "# map=" << k.meta.map << "\n";
    os << "# exact=" << (k.meta.exact ? 1 : 0) << "\n";
    os << "# shots=" << k.meta.shots << "\n";
    os << "# noise_p=" << k.meta.noise_p << "\n";
    os << "# seed=" << k.meta.seed << "\n";
    os << "# psd_repaired=" << (k.meta.psd_repaired ? 1 : 0) << "\n";
    os << "# psd_shift_fro=" << k.meta.psd_shift_fro << "\n";
    for (Eigen::Index i = 0; i < k.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.values.cols(); ++j)
            os << (j ? "," : "") << k.values(i, j);
        os << "\n";
    }
}

}  // namespace qwave::kernel
