#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qwave/behave.hpp"
#include "qwave/qkernel.hpp"
#include "qwave/qwpt.hpp"
#include "qwave/spsa.hpp"
#include "qwave/svm.hpp"

namespace qwave::pipeline {

struct Dataset {
    Eigen::MatrixXd x;  // may contain NaN before fill_missing
    std::vector<int> y;  // -1 normal, +1 anomalous
    std::vector<std::string> feature_names;
    std::string provenance;
    int rejected_rows = 0;
    std::vector<int> imputed_counts;  // filled by fill_missing
};

struct LabelMapping {
    std::string label_column;
    std::map<std::string, int> values;  // exact match -> label
    bool benign_substring_rule = false;  // cells containing "benign" -> -1, else +1
};

LabelMapping botiot_preset();  // column "attack": 0 -> -1, 1 -> +1
LabelMapping iot23_preset();   // column "label": benign substring rule

// Keeps only fully numeric feature columns; maps the label column through
// the mapping and rejects rows whose label cannot be mapped.
Dataset load_csv(const std::string& path, const LabelMapping& mapping);

// Per-feature median imputation; a feature with no observed values is
// dropped with a warning.
Dataset fill_missing(Dataset d);

struct Scaler {
    Eigen::VectorXd min, max;
};

Scaler fit_minmax(const Eigen::MatrixXd& x);
Eigen::MatrixXd apply_minmax(const Eigen::MatrixXd& x, const Scaler& s);

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;       // feature x k, orthonormal columns
    Eigen::VectorXd explained_ratio;  // length k
};

// Covariance eigendecomposition (dual form when features exceed samples);
// components ordered by decreasing eigenvalue, each signed so its
// largest-magnitude entry is positive. k larger than the numerical rank is
// reduced with a warning.
std::pair<PcaModel, Eigen::MatrixXd> pca_fit_transform(const Eigen::MatrixXd& x, int k);
Eigen::MatrixXd pca_apply(const PcaModel& m, const Eigen::MatrixXd& x);

struct SplitIndices {
    std::vector<int> train, test;
};

SplitIndices split(const Dataset& d, int test_size, bool stratified, std::uint64_t seed);

// Two benign Gaussian clusters flanking a tighter attack cluster placed
// between them (linearly inseparable by construction). Deterministic in the
// seed.
Dataset synth_dataset(int n, int dim, double anomaly_frac, std::uint64_t seed);
void write_dataset_csv(const Dataset& d, std::ostream& os);

enum class FeatureSource { Qwpt, Pca, QwptMarkers };
enum class NoiseRegime { Ideal, Depolarizing };

struct ExperimentConfig {
    FeatureSource feature_source = FeatureSource::Pca;
    int qubits = 8;
    kernel::MapKind map_kind = kernel::MapKind::Zz;
    int reps = 2;
    bool trainable = false;
    spsa::SpsaConfig spsa_cfg;
    NoiseRegime regime = NoiseRegime::Ideal;
    double noise_p = 0.01;
    std::uint64_t shots = 0;  // 0 = exact kernel evaluation
    int test_size = 30;
    double C = 1.0;
    int qwpt_levels = 2;
    bool qwpt_rz = true;
    qwpt::CircuitStyle qwpt_style = qwpt::CircuitStyle::PaperPairs;
    double alpha_chi = 0.05;
    std::uint64_t seed = 0;
    int jobs = 2;
    bool with_linear_baseline = false;
    bool emit_penalty_series = false;  // per-iteration test losses (trainable runs)
};

struct StageTimings {
    double preprocess = 0.0, features = 0.0, kernel = 0.0, train = 0.0, evaluate = 0.0;
};

struct ExperimentResult {
    svm::Metrics metrics;
    std::optional<svm::Metrics> linear_baseline;
    kernel::KernelMatrix train_kernel;
    kernel::FeatureMapSpec final_map;  // includes trained theta when trainable
    spsa::SpsaTrace trace;             // empty unless trainable
    std::vector<double> test_loss_series;  // per-iteration held-out svc_loss
    StageTimings timings;
    std::vector<int> predictions;
    std::vector<int> truth;
};

ExperimentResult run_experiment(const Dataset& d, const ExperimentConfig& cfg);

struct QubitSweepRow {
    int qubits;
    double acc_noiseless, acc_noisy;
};

std::vector<QubitSweepRow> sweep_qubits(const Dataset& d, const ExperimentConfig& base,
                                        const std::vector<int>& qubit_list = {8, 10, 12, 15});

struct KernelSetting {
    double perturbation, learning_rate;
    int iterations;
};

struct KernelSweepRow {
    KernelSetting setting;
    double acc_noiseless, acc_noisy;
    spsa::SpsaTrace trace_noiseless, trace_noisy;
    std::vector<double> test_loss_noiseless, test_loss_noisy;
};

std::vector<KernelSweepRow> sweep_kernel_settings(
    const Dataset& d, const ExperimentConfig& base,
    const std::vector<KernelSetting>& settings = {{0.05, 0.05, 10},
                                                  {0.05, 0.5, 10},
                                                  {0.05, 1.0, 10}});

struct NoisePenaltyReport {
    std::vector<double> delta;          // noisy - clean per step
    double a_noise = 0.0;               // sum of positive parts
    std::vector<double> clean_sorted;   // ECDF-ready
    std::vector<double> noisy_sorted;
};

NoisePenaltyReport noise_penalty(std::span<const double> clean,
                                 std::span<const double> noisy);

// QWPT feature block for one normalized sample: f ++ E ++ wpee.
std::vector<double> qwpt_feature_row(std::span<const double> x01,
                                     const ExperimentConfig& cfg);

// Kernel-ready feature matrix for every dataset row: the configured feature
// source, PCA to cfg.qubits dimensions when needed, then min-max into [0,1].
// Behavioral markers use the benign rows listed in idx.train as reference.
Eigen::MatrixXd build_feature_matrix(const Dataset& d, const Eigen::MatrixXd& x01,
                                     const SplitIndices& idx, const ExperimentConfig& cfg);

void write_metrics_csv(const svm::Metrics& m, std::ostream& os);
void write_spsa_trace_csv(const spsa::SpsaTrace& trace, std::ostream& os);
void write_noise_penalty_csv(const NoisePenaltyReport& r, std::ostream& os);

}  // namespace qwave::pipeline
