#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qwave/qsim.hpp"

namespace qwave::kernel {

enum class MapKind { Zz, Phase, TrainableZz };

struct FeatureMapSpec {
    MapKind kind = MapKind::Zz;
    int n_qubits = 0;
    int reps = 2;
    std::vector<double> theta;  // TrainableZz: one angle per qubit

    static FeatureMapSpec zz(int n_qubits, int reps = 2);
    static FeatureMapSpec phase(int n_qubits);
    static FeatureMapSpec trainable(std::vector<double> theta, int reps = 2);

    void validate() const;
    std::string describe() const;
};

sim::Circuit zz_feature_map(std::span<const double> x, int reps);
sim::Circuit phase_feature_map(std::span<const double> x);
sim::Circuit trainable_feature_map(std::span<const double> theta,
                                   std::span<const double> x, int reps = 2);
sim::Circuit feature_map_circuit(const FeatureMapSpec& map, std::span<const double> x);

// |<phi(x_i)|phi(x_j)>|^2 from exact statevectors.
double fidelity_exact(const FeatureMapSpec& map, std::span<const double> xi,
                      std::span<const double> xj);
double fidelity_exact(const sim::Statevector& a, const sim::Statevector& b);

// U(x_j) followed by U(x_i)^dagger; the estimate is the empirical frequency
// of the all-zeros outcome.
double fidelity_compute_uncompute(const FeatureMapSpec& map, std::span<const double> xi,
                                  std::span<const double> xj, std::uint64_t shots,
                                  const std::optional<sim::NoiseModel>& noise,
                                  std::uint64_t seed);

struct KernelMeta {
    std::string map;
    bool exact = true;
    std::uint64_t shots = 0;
    double noise_p = 0.0;
    std::uint64_t seed = 0;
    bool psd_repaired = false;
    double psd_shift_fro = 0.0;
};

struct KernelMatrix {
    Eigen::MatrixXd values;
    KernelMeta meta;
};

struct KernelExecOptions {
    bool exact = true;
    std::uint64_t shots = 1024;
    std::optional<sim::NoiseModel> noise;
    std::uint64_t seed = 0;
    int jobs = 1;
};

// Symmetric Gram matrix over the rows of X. Exact noiseless mode caches one
// statevector per row and pins the diagonal to 1; shot mode estimates every
// entry (diagonal included, so a noise floor stays visible) with the
// deterministic per-entry seed mix(seed, i, j), making parallel and serial
// assembly bit-identical.
KernelMatrix kernel_matrix(const FeatureMapSpec& map, const Eigen::MatrixXd& x,
                           const KernelExecOptions& opts);

// Rectangular block K(rows_i, cols_j); per-entry seeds are offset so a test
// block never reuses a training entry's stream.
Eigen::MatrixXd kernel_rows(const FeatureMapSpec& map, const Eigen::MatrixXd& rows,
                            const Eigen::MatrixXd& cols, const KernelExecOptions& opts,
                            std::uint64_t row_seed_offset);

// alpha * exp(-gamma ||xi-xj||^2) + (1-alpha) * K_quantum(xi, xj)
double composite_kernel(std::span<const double> xi, std::span<const double> xj,
                        double alpha, double gamma_rbf, const FeatureMapSpec& map);

// Eigenvalue clipping; the Frobenius distance moved is recorded in the meta.
KernelMatrix psd_repair(const KernelMatrix& k);

double min_eigenvalue(const Eigen::MatrixXd& m);

void write_kernel_csv(const KernelMatrix& k, std::ostream& os);

}  // namespace qwave::kernel
