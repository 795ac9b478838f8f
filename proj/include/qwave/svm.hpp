#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qwave/qkernel.hpp"

namespace qwave::svm {

struct SvmModel {
    Eigen::VectorXd alpha;         // dual coefficients, 0 <= alpha_i <= C
    double b = 0.0;
    std::vector<int> support_idx;  // indices with alpha_i > 1e-8
    std::vector<int> y;            // training labels in {-1,+1}
    double C = 1.0;
    std::string kernel_ref;
    double kkt_residual = 0.0;
};

// SMO with maximal-violating-pair selection; stops at KKT residual <= tol.
// Requires a PSD kernel (post-repair) and both classes present. The bias is
// averaged over free support vectors.
SvmModel train_dual(const kernel::KernelMatrix& k, std::span<const int> y, double C,
                    double tol = 1e-3);

double decision_value(const SvmModel& model, std::span<const double> k_row);
int predict(const SvmModel& model, std::span<const double> k_row);  // tie -> +1

struct OneClassModel {
    Eigen::VectorXd alpha;  // 0 <= alpha_i <= 1/(nu N), sum alpha = 1
    double rho = 0.0;
    double nu = 0.5;
};

// Schoelkopf one-class dual: minimize 0.5 a^T K a subject to the nu box and
// sum(alpha) = 1.
OneClassModel train_one_class(const kernel::KernelMatrix& k, double nu, double tol = 1e-3);

double one_class_decision(const OneClassModel& model, std::span<const double> k_row);

// Reliability-weighted hinge loss over a linear model and its subgradient
// (margin-boundary samples count as violators).
double weighted_hinge_loss(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& x,
                           std::span<const int> y, std::span<const double> weights);

struct HingeGradient {
    Eigen::VectorXd grad_w;
    double grad_b = 0.0;
};

HingeGradient weighted_hinge_gradient(const Eigen::VectorXd& w, double b,
                                      const Eigen::MatrixXd& x, std::span<const int> y,
                                      std::span<const double> weights);

struct WeightedHingeConfig {
    std::vector<double> weights;  // per-sample, > 0
    double learning_rate = 0.1;
    int epochs = 200;
};

// Subgradient descent on the weighted hinge; the linear-primal path used by
// the noise-aware training study.
std::pair<Eigen::VectorXd, double> train_weighted_linear(const Eigen::MatrixXd& x,
                                                         std::span<const int> y,
                                                         const WeightedHingeConfig& cfg);

double dual_objective(const Eigen::MatrixXd& k, std::span<const int> y,
                      const Eigen::VectorXd& alpha);

// Negated optimal dual objective of the SVM trained on K(theta); minimizing
// it maximizes the margin objective.
double svc_loss(std::span<const double> theta, const Eigen::MatrixXd& x_train,
                std::span<const int> y_train, int reps, double C,
                const kernel::KernelExecOptions& opts);

struct Metrics {
    double accuracy = 0.0;
    // index 0 = negative class (-1, normal), index 1 = positive (+1, anomalous)
    double precision[2] = {0.0, 0.0};
    double recall[2] = {0.0, 0.0};
    double f1[2] = {0.0, 0.0};
    long confusion[2][2] = {{0, 0}, {0, 0}};  // [truth][prediction]
};

Metrics evaluate(std::span<const int> predictions, std::span<const int> truth);

}  // namespace qwave::svm
