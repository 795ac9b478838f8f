#include "qwave/behave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qwave::behave {

std::vector<double> relative_energies(std::span<const double> energies) {
    require(!energies.empty(), "relative_energies: empty input");
    double total = 0.0;
    for (double e : energies) {
        require(e >= 0.0, "relative_energies: negative energy");
        total += e;
    }
    require(total > 0.0, "relative_energies: all-zero energies");
    std::vector<double> p(energies.size());
    for (std::size_t t = 0; t < p.size(); ++t) p[t] = energies[t] / total;
    return p;
}

double normalized_entropy(std::span<const double> p) {
    require(p.size() >= 2, "normalized_entropy: need at least two bins");
    double total = 0.0;
    for (double v : p) {
        require(v >= -1e-12, "normalized_entropy: negative mass");
        total += v;
    }
    require(std::abs(total - 1.0) <= 1e-6, "normalized_entropy: input not on the simplex");
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return std::clamp(h / std::log2(static_cast<double>(p.size())), 0.0, 1.0);
}

double chi_square_statistic(std::span<const double> observed,
                            std::span<const double> expected) {
    require(observed.size() == expected.size(), "chi_square_statistic: size mismatch");
    require(!observed.empty(), "chi_square_statistic: empty input");
    double chi2 = 0.0;
    for (std::size_t j = 0; j < observed.size(); ++j) {
        require(expected[j] > 0.0, "chi_square_statistic: expected frequency must be positive");
        const double d = observed[j] - expected[j];
        chi2 += d * d / expected[j];
    }
    return chi2;
}

// Series / continued-fraction evaluation of the regularized lower incomplete
// gamma function.
double regularized_gamma_p(double a, double x) {
    require(a > 0.0 && x >= 0.0, "regularized_gamma_p: domain error");
    if (x == 0.0) return 0.0;
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, term = sum;
        for (int i = 0; i < kMaxIter; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * kEps) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / kTiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

double chi_square_quantile(double prob, int dof) {
    require(dof >= 1, "chi_square_quantile: dof must be >= 1");
    require(prob > 0.0 && prob < 1.0, "chi_square_quantile: prob must lie in (0,1)");
    const double a = dof / 2.0;
    double lo = 0.0;
    double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
    while (regularized_gamma_p(a, hi / 2.0) < prob) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (regularized_gamma_p(a, mid / 2.0) < prob)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

Decision chi_square_decision(double chi2, int dof, double alpha) {
    require(chi2 >= 0.0, "chi_square_decision: statistic must be non-negative");
    require(alpha > 0.0 && alpha < 1.0, "chi_square_decision: alpha must lie in (0,1)");
    return chi2 <= chi_square_quantile(1.0 - alpha, dof) ? Decision::Normal
                                                         : Decision::Anomalous;
}

BenignReference build_benign_reference(const std::vector<std::vector<double>>& benign_p_vectors,
                                       int bins, std::size_t eval_batch) {
    require(benign_p_vectors.size() >= 30, "benign reference needs at least 30 samples");
    require(bins >= 2, "benign reference needs at least two bins");
    require(eval_batch >= 1, "evaluation batch must be positive");

    std::vector<double> h;
    h.reserve(benign_p_vectors.size());
    for (const auto& p : benign_p_vectors) h.push_back(normalized_entropy(p));

    std::vector<double> raw(bins, 0.0);
    for (double v : h) {
        auto b = static_cast<std::size_t>(std::min(static_cast<double>(bins) - 1.0,
                                                   std::floor(v * bins)));
        raw[b] += 1.0;
    }
    const double scale = static_cast<double>(eval_batch) / static_cast<double>(h.size());
    for (double& c : raw) c *= scale;

    std::vector<double> edges(bins + 1);
    for (int j = 0; j <= bins; ++j) edges[j] = static_cast<double>(j) / bins;

    // Merge deficient bins into their right neighbor (last bin merges left).
    std::vector<double> m_counts = raw;
    std::vector<double> m_edges = edges;
    bool changed = true;
    while (changed && m_counts.size() > 1) {
        changed = false;
        for (std::size_t j = 0; j < m_counts.size(); ++j) {
            if (m_counts[j] >= 5.0) continue;
            if (j + 1 < m_counts.size()) {
                m_counts[j + 1] += m_counts[j];
                m_counts.erase(m_counts.begin() + j);
                m_edges.erase(m_edges.begin() + j + 1);
            } else {
                m_counts[j - 1] += m_counts[j];
                m_counts.erase(m_counts.begin() + j);
                m_edges.erase(m_edges.begin() + j);
            }
            changed = true;
            break;
        }
    }
    require(m_counts.size() >= 2,
            "benign reference degenerate: fewer than 2 bins after merging");

    BenignReference ref;
    ref.edges = std::move(m_edges);
    ref.expected = std::move(m_counts);
    ref.dof = static_cast<int>(ref.expected.size()) - 1;
    return ref;
}

std::vector<double> bin_counts(std::span<const double> h_norms, const BenignReference& ref) {
    std::vector<double> counts(ref.expected.size(), 0.0);
    for (double v : h_norms) {
        auto it = std::upper_bound(ref.edges.begin(), ref.edges.end(), v);
        std::size_t idx = it == ref.edges.begin()
                              ? 0
                              : static_cast<std::size_t>(it - ref.edges.begin()) - 1;
        counts[std::min(idx, counts.size() - 1)] += 1.0;
    }
    return counts;
}

double profile_chi_square(std::span<const double> p, std::span<const double> benign_mean_p) {
    require(p.size() == benign_mean_p.size(), "profile_chi_square: size mismatch");
    std::vector<double> expected(benign_mean_p.begin(), benign_mean_p.end());
    for (double& e : expected) e = std::max(e, 1e-12);
    return chi_square_statistic(p, expected);
}

BehavioralMarkers markers_for_sample(std::span<const double> p,
                                     std::span<const double> benign_mean_p,
                                     double alpha) {
    BehavioralMarkers m;
    m.h_norm = normalized_entropy(p);
    m.chi2 = profile_chi_square(p, benign_mean_p);
    m.dof = static_cast<int>(p.size()) - 1;
    m.decision = chi_square_decision(m.chi2, m.dof, alpha);
    return m;
}

FeatureStats descriptive_stats(const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    const auto d = x.cols();
    require(n >= 2, "descriptive_stats: need at least two samples");
    require(d >= 1, "descriptive_stats: need at least one feature");

    FeatureStats s;
    s.mean = x.colwise().mean();
    s.variance.resize(d);
    s.skewness.resize(d);
    s.kurtosis.resize(d);
    std::vector<bool> is_const(d, false);
    Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto col = centered.col(j);
        const double m2 = col.squaredNorm() / n;
        const double m3 = col.array().cube().mean();
        const double m4 = col.array().square().square().mean();
        s.variance[j] = m2;
        is_const[j] = m2 <= 1e-24 * std::max(1.0, s.mean[j] * s.mean[j]);
        if (is_const[j]) {
            s.constant_features.push_back(static_cast<int>(j));
            s.skewness[j] = 0.0;
            s.kurtosis[j] = 0.0;
            warn("behave", "constant feature " + std::to_string(j) +
                               ": higher moments reported as 0, correlation row as 0");
        } else {
            const double sd = std::sqrt(m2);
            s.skewness[j] = m3 / (sd * sd * sd);
            s.kurtosis[j] = m4 / (m2 * m2);
        }
    }

    s.correlation = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) s.correlation(j, j) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (is_const[j]) continue;
        for (Eigen::Index k = j + 1; k < d; ++k) {
            if (is_const[k]) continue;
            const double cross = centered.col(j).dot(centered.col(k));
            const double r = cross /
                             ((n - 1) * std::sqrt(s.variance[j]) * std::sqrt(s.variance[k]));
            s.correlation(j, k) = s.correlation(k, j) = r;
            if (std::abs(r) > 1.0 + 1e-12)
                s.out_of_range.emplace_back(static_cast<int>(j), static_cast<int>(k));
        }
    }
    return s;
}

std::vector<double> append_markers(std::span<const double> features,
                                   const BehavioralMarkers& markers) {
    require(std::isfinite(markers.h_norm) && std::isfinite(markers.chi2),
            "append_markers: non-finite markers");
    std::vector<double> out(features.begin(), features.end());
    out.push_back(markers.h_norm);
    out.push_back(markers.chi2 / (markers.chi2 + markers.dof));
    return out;
}

}  // namespace qwave::behave
