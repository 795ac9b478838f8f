#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "qwave/common.hpp"

namespace qwave::behave {

enum class Decision { Normal, Anomalous };

struct BehavioralMarkers {
    double h_norm = 0.0;  // normalized entropy in [0,1]
    double chi2 = 0.0;
    int dof = 1;
    Decision decision = Decision::Normal;
};

// P^(t) = E^(t) / sum(E); order-preserving, sums to 1.
std::vector<double> relative_energies(std::span<const double> energies);

// -sum P log2 P / log2 T with 0*log0 = 0; needs T >= 2.
double normalized_entropy(std::span<const double> p);

double chi_square_statistic(std::span<const double> observed,
                            std::span<const double> expected);

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

// Inverse of P(dof/2, x/2) at `prob`, i.e. the chi-square quantile. Computed
// numerically; no table lookup.
double chi_square_quantile(double prob, int dof);

Decision chi_square_decision(double chi2, int dof, double alpha = 0.05);

// Benign reference for the batch-level chi-square test: equal-width bins over
// the benign h_norm distribution in [0,1], expected counts scaled to the
// evaluation batch size, bins with expected count below 5 merged with a
// neighbor. dof = post-merge bin count - 1.
struct BenignReference {
    std::vector<double> edges;     // post-merge, size = bins + 1
    std::vector<double> expected;  // scaled to the evaluation batch
    int dof = 1;
};

BenignReference build_benign_reference(const std::vector<std::vector<double>>& benign_p_vectors,
                                       int bins, std::size_t eval_batch);

// Histogram of h_norm values in the reference's merged bins.
std::vector<double> bin_counts(std::span<const double> h_norms, const BenignReference& ref);

// Per-sample chi-square divergence of a sub-band energy profile against the
// benign mean profile (expected entries floored away from zero); dof = T - 1.
double profile_chi_square(std::span<const double> p, std::span<const double> benign_mean_p);

BehavioralMarkers markers_for_sample(std::span<const double> p,
                                     std::span<const double> benign_mean_p,
                                     double alpha = 0.05);

// Descriptive statistics with the conventions used by the pipeline kept
// as-is: variance divides by n while the correlation divides by (n-1); the
// correlation of a feature with an exact copy of itself is therefore
// n/(n-1), not 1. Diagonal entries are set to 1; off-diagonal entries with
// magnitude above 1 are recorded in out_of_range rather than clipped.
struct FeatureStats {
    Eigen::VectorXd mean, variance, skewness, kurtosis;
    Eigen::MatrixXd correlation;
    std::vector<int> constant_features;
    std::vector<std::pair<int, int>> out_of_range;
};

FeatureStats descriptive_stats(const Eigen::MatrixXd& samples_by_features);

// f ++ [h_norm, chi2/(chi2+dof)]; both appended values lie in [0,1).
std::vector<double> append_markers(std::span<const double> features,
                                   const BehavioralMarkers& markers);

}  // namespace qwave::behave
