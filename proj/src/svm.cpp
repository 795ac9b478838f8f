#include "qwave/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qwave::svm {

namespace {

constexpr double kTau = 1e-12;
constexpr double kSupportEps = 1e-8;

}  // namespace

SvmModel train_dual(const kernel::KernelMatrix& k, std::span<const int> y, double C,
                    double tol) {
    const Eigen::Index n = k.values.rows();
    require(n >= 2, "train_dual: need at least two samples");
    require(static_cast<Eigen::Index>(y.size()) == n, "train_dual: label count mismatch");
    require(C > 0.0, "train_dual: C must be positive");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        require(v == 1 || v == -1, "train_dual: labels must be -1 or +1");
        (v == 1 ? has_pos : has_neg) = true;
    }
    require(has_pos && has_neg, "train_dual: both classes must be present");
    require(kernel::min_eigenvalue(k.values) >= -1e-8,
            "train_dual: kernel is not PSD; run psd_repair first");

    // Minimize 0.5 a^T Q a - e^T a with Q_ij = y_i y_j K_ij.
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
    const auto& K = k.values;

    const long max_updates = 10L * n * n + 1000;
    double residual = std::numeric_limits<double>::infinity();
    for (long it = 0; it < max_updates; ++it) {
        // i maximizes -y g over the up set, j minimizes it over the down set.
        int i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const bool up = (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
            const bool dn = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C);
            const double v = -y[t] * grad[t];
            if (up && v > gmax) {
                gmax = v;
                i = static_cast<int>(t);
            }
            if (dn && v < gmin) {
                gmin = v;
                j = static_cast<int>(t);
            }
        }
        residual = gmax - gmin;
        if (i < 0 || j < 0 || residual <= tol) break;

        const double qii = K(i, i), qjj = K(j, j);
        const double qij = y[i] * y[j] * K(i, j);
        const double old_ai = alpha[i], old_aj = alpha[j];

        if (y[i] != y[j]) {
            const double quad = std::max(qii + qjj + 2.0 * qij, kTau);
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0 && alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if (diff <= 0.0 && alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0 && alpha[i] > C) {
                alpha[i] = C;
                alpha[j] = C - diff;
            } else if (diff <= 0.0 && alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            const double quad = std::max(qii + qjj - 2.0 * qij, kTau);
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C && alpha[i] > C) {
                alpha[i] = C;
                alpha[j] = sum - C;
            } else if (sum <= C && alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C && alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = sum - C;
            } else if (sum <= C && alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        if (dai == 0.0 && daj == 0.0) break;  // stuck at the boundary
        for (Eigen::Index t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
    }
    if (residual > tol)
        warn("svm", "SMO stopped at KKT residual " + std::to_string(residual));

    SvmModel model;
    model.alpha = alpha;
    model.C = C;
    model.y.assign(y.begin(), y.end());
    model.kernel_ref = k.meta.map;
    model.kkt_residual = residual;

    // b averaged over free support vectors; midpoint of the feasible
    // interval when every multiplier sits at a bound.
    double b_sum = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha[t] > kSupportEps) model.support_idx.push_back(static_cast<int>(t));
        if (alpha[t] > kSupportEps && alpha[t] < C - kSupportEps) {
            b_sum += -y[t] * grad[t];
            ++n_free;
        }
    }
    if (n_free > 0) {
        model.b = b_sum / n_free;
    } else {
        double ub = std::numeric_limits<double>::infinity();
        double lb = -std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool up = (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
            const bool dn = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C);
            if (up) lb = std::max(lb, v);
            if (dn) ub = std::min(ub, v);
        }
        model.b = std::isfinite(lb) && std::isfinite(ub) ? 0.5 * (lb + ub) : 0.0;
    }
    return model;
}

double decision_value(const SvmModel& model, std::span<const double> k_row) {
    require(static_cast<Eigen::Index>(k_row.size()) == model.alpha.size(),
            "decision_value: kernel row length mismatch");
    double f = model.b;
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i)
        if (model.alpha[i] > 0.0) f += model.alpha[i] * model.y[i] * k_row[i];
    return f;
}

int predict(const SvmModel& model, std::span<const double> k_row) {
    return decision_value(model, k_row) < 0.0 ? -1 : 1;
}

OneClassModel train_one_class(const kernel::KernelMatrix& k, double nu, double tol) {
    const Eigen::Index n = k.values.rows();
    require(n >= 2, "train_one_class: need at least two samples");
    require(nu > 0.0 && nu <= 1.0, "train_one_class: nu must lie in (0,1]");
    const auto& K = k.values;
    const double ub = 1.0 / (nu * n);

    OneClassModel model;
    model.nu = nu;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    const int n_full = static_cast<int>(std::floor(nu * n));
    for (int i = 0; i < n_full && i < n; ++i) alpha[i] = ub;
    if (n_full < n) alpha[n_full] = 1.0 - n_full * ub;

    Eigen::VectorXd grad = K * alpha;
    const long max_updates = 10L * n * n + 1000;
    for (long it = 0; it < max_updates; ++it) {
        int i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            if (alpha[t] > 0.0 && grad[t] > gmax) {
                gmax = grad[t];
                i = static_cast<int>(t);
            }
            if (alpha[t] < ub && grad[t] < gmin) {
                gmin = grad[t];
                j = static_cast<int>(t);
            }
        }
        if (i < 0 || j < 0 || gmax - gmin <= tol) break;
        const double quad = std::max(K(i, i) + K(j, j) - 2.0 * K(i, j), kTau);
        double delta = (grad[i] - grad[j]) / quad;  // mass moved from i to j
        delta = std::min(delta, alpha[i]);
        delta = std::min(delta, ub - alpha[j]);
        if (delta <= 0.0) break;
        alpha[i] -= delta;
        alpha[j] += delta;
        grad += delta * (K.col(j) - K.col(i));
    }

    model.alpha = alpha;
    double rho_sum = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha[t] > kSupportEps && alpha[t] < ub - kSupportEps) {
            rho_sum += grad[t];
            ++n_free;
        }
    }
    if (n_free > 0) {
        model.rho = rho_sum / n_free;
    } else {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            if (alpha[t] > 0.0) hi = std::max(hi, grad[t]);
            if (alpha[t] < ub) lo = std::min(lo, grad[t]);
        }
        if (!std::isfinite(lo)) lo = hi;  // nu = 1: every alpha at its bound
        if (!std::isfinite(hi)) hi = lo;
        model.rho = 0.5 * (lo + hi);
    }
    return model;
}

double one_class_decision(const OneClassModel& model, std::span<const double> k_row) {
    require(static_cast<Eigen::Index>(k_row.size()) == model.alpha.size(),
            "one_class_decision: kernel row length mismatch");
    double f = -model.rho;
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i)
        if (model.alpha[i] > 0.0) f += model.alpha[i] * k_row[i];
    return f;
}

double weighted_hinge_loss(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& x,
                           std::span<const int> y, std::span<const double> weights) {
    const Eigen::Index n = x.rows();
    require(static_cast<Eigen::Index>(y.size()) == n &&
                static_cast<Eigen::Index>(weights.size()) == n,
            "weighted hinge: size mismatch");
    require(x.cols() == w.size(), "weighted hinge: dimension mismatch");
    double wsum = 0.0, loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        require(weights[i] > 0.0, "weighted hinge: weights must be positive");
        wsum += weights[i];
        const double margin = 1.0 - y[i] * (x.row(i).dot(w) + b);
        if (margin > 0.0) loss += weights[i] * margin;
    }
    return loss / wsum;
}

HingeGradient weighted_hinge_gradient(const Eigen::VectorXd& w, double b,
                                      const Eigen::MatrixXd& x, std::span<const int> y,
                                      std::span<const double> weights) {
    const Eigen::Index n = x.rows();
    require(static_cast<Eigen::Index>(y.size()) == n &&
                static_cast<Eigen::Index>(weights.size()) == n,
            "weighted hinge: size mismatch");
    HingeGradient g;
    g.grad_w = Eigen::VectorXd::Zero(w.size());
    double wsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        require(weights[i] > 0.0, "weighted hinge: weights must be positive");
        wsum += weights[i];
        const double margin = 1.0 - y[i] * (x.row(i).dot(w) + b);
        if (margin >= 0.0) {  // boundary counts as a violator
            g.grad_w -= weights[i] * y[i] * x.row(i).transpose();
            g.grad_b -= weights[i] * y[i];
        }
    }
    g.grad_w /= wsum;
    g.grad_b /= wsum;
    return g;
}

std::pair<Eigen::VectorXd, double> train_weighted_linear(const Eigen::MatrixXd& x,
                                                         std::span<const int> y,
                                                         const WeightedHingeConfig& cfg) {
    require(cfg.learning_rate > 0.0, "weighted hinge: learning rate must be positive");
    require(cfg.epochs >= 1, "weighted hinge: epochs must be >= 1");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double b = 0.0;
    for (int e = 0; e < cfg.epochs; ++e) {
        const HingeGradient g = weighted_hinge_gradient(w, b, x, y, cfg.weights);
        w -= cfg.learning_rate * g.grad_w;
        b -= cfg.learning_rate * g.grad_b;
    }
    return {w, b};
}

double dual_objective(const Eigen::MatrixXd& k, std::span<const int> y,
                      const Eigen::VectorXd& alpha) {
    double obj = alpha.sum();
    double quad = 0.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        for (Eigen::Index j = 0; j < alpha.size(); ++j) {
            if (alpha[j] == 0.0) continue;
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
        }
    }
    return obj - 0.5 * quad;
}

double svc_loss(std::span<const double> theta, const Eigen::MatrixXd& x_train,
                std::span<const int> y_train, int reps, double C,
                const kernel::KernelExecOptions& opts) {
    const kernel::FeatureMapSpec map =
        kernel::FeatureMapSpec::trainable(std::vector<double>(theta.begin(), theta.end()),
                                          reps);
    const kernel::KernelMatrix raw = kernel::kernel_matrix(map, x_train, opts);
    const kernel::KernelMatrix repaired = kernel::psd_repair(raw);
    const SvmModel model = train_dual(repaired, y_train, C);
    return -dual_objective(repaired.values, y_train, model.alpha);
}

Metrics evaluate(std::span<const int> predictions, std::span<const int> truth) {
    require(!predictions.empty(), "evaluate: empty input");
    require(predictions.size() == truth.size(), "evaluate: size mismatch");
    Metrics m;
    long correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int t = truth[i] == 1 ? 1 : 0;
        const int p = predictions[i] == 1 ? 1 : 0;
        ++m.confusion[t][p];
        if (t == p) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
    for (int c = 0; c < 2; ++c) {
        const long tp = m.confusion[c][c];
        const long fp = m.confusion[1 - c][c];
        const long fn = m.confusion[c][1 - c];
        m.precision[c] = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        m.recall[c] = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        m.f1[c] = m.precision[c] + m.recall[c] > 0.0
                      ? 2.0 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c])
                      : 0.0;
    }
    return m;
}

}  // namespace qwave::svm
