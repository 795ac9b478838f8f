#include "qwave/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "qwave/csvio.hpp"
#include "qwave/encode.hpp"

namespace qwave::pipeline {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
auto with_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(stage + ": " + e.what());
    } catch (const ContractError& e) {
        throw ContractError(stage + ": " + e.what());
    }
}

std::vector<double> row_vec(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> v(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[j] = m(r, j);
    return v;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(r) = m.row(idx[r]);
    return out;
}

}  // namespace

LabelMapping botiot_preset() {
    LabelMapping m;
    m.label_column = "attack";
    m.values = {{"0", -1}, {"1", 1}};
    return m;
}

LabelMapping iot23_preset() {
    LabelMapping m;
    m.label_column = "label";
    m.benign_substring_rule = true;
    return m;
}

Dataset load_csv(const std::string& path, const LabelMapping& mapping) {
    const csvio::Table t = csvio::read_csv_file(path);
    if (t.header.empty() || t.rows.empty())
        throw ConfigError("CSV has no data rows: " + path);

    int label_col = -1;
    for (std::size_t j = 0; j < t.header.size(); ++j)
        if (t.header[j] == mapping.label_column) label_col = static_cast<int>(j);
    if (label_col < 0)
        throw ConfigError("label column '" + mapping.label_column + "' not found in " + path);

    // A feature column is kept when every cell parses as a number or is a
    // recognized missing marker.
    const std::size_t n_cols = t.header.size();
    auto is_missing_marker = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), ::tolower);
        return s.empty() || s == "na" || s == "nan" || s == "?" || s == "null";
    };
    std::vector<bool> numeric(n_cols, true);
    numeric[label_col] = false;
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < n_cols && j < row.size(); ++j) {
            if (!numeric[j]) continue;
            double v;
            if (!csvio::parse_number(row[j], v) && !is_missing_marker(row[j]))
                numeric[j] = false;
        }
    }

    std::vector<int> feature_cols;
    for (std::size_t j = 0; j < n_cols; ++j)
        if (numeric[j]) feature_cols.push_back(static_cast<int>(j));
    if (feature_cols.empty()) throw ConfigError("no numeric feature columns in " + path);

    auto map_label = [&](const std::string& cell, int& label) -> bool {
        if (mapping.benign_substring_rule) {
            std::string s = cell;
            std::transform(s.begin(), s.end(), s.begin(), ::tolower);
            label = s.find("benign") != std::string::npos ? -1 : 1;
            return true;
        }
        const auto it = mapping.values.find(cell);
        if (it == mapping.values.end()) return false;
        label = it->second;
        return true;
    };

    Dataset d;
    d.provenance = path;
    std::vector<std::vector<double>> rows;
    for (const auto& row : t.rows) {
        if (row.size() < n_cols) {
            ++d.rejected_rows;
            continue;
        }
        int label;
        if (!map_label(row[label_col], label)) {
            ++d.rejected_rows;
            continue;
        }
        std::vector<double> vals(feature_cols.size());
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            double v;
            csvio::parse_number(row[feature_cols[j]], v);
            vals[j] = v;  // NaN for missing, handled by fill_missing
        }
        rows.push_back(std::move(vals));
        d.y.push_back(label);
    }
    if (rows.empty()) throw ConfigError("no usable rows in " + path);
    if (d.rejected_rows > 0)
        warn("pipeline", std::to_string(d.rejected_rows) + " rows rejected from " + path);

    d.x.resize(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < rows[r].size(); ++j) d.x(r, j) = rows[r][j];
    for (int j : feature_cols) d.feature_names.push_back(t.header[j]);
    return d;
}

Dataset fill_missing(Dataset d) {
    const Eigen::Index n = d.x.rows();
    std::vector<int> keep;
    d.imputed_counts.assign(d.x.cols(), 0);
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
        std::vector<double> observed;
        observed.reserve(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (!std::isnan(d.x(i, j))) observed.push_back(d.x(i, j));
        if (observed.empty()) {
            warn("pipeline", "feature '" + d.feature_names[j] + "' entirely missing; dropped");
            continue;
        }
        std::sort(observed.begin(), observed.end());
        const std::size_t m = observed.size();
        const double median = m % 2 ? observed[m / 2]
                                    : 0.5 * (observed[m / 2 - 1] + observed[m / 2]);
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::isnan(d.x(i, j))) {
                d.x(i, j) = median;
                ++d.imputed_counts[j];
            }
        keep.push_back(static_cast<int>(j));
    }
    if (static_cast<Eigen::Index>(keep.size()) != d.x.cols()) {
        Eigen::MatrixXd x(n, static_cast<Eigen::Index>(keep.size()));
        std::vector<std::string> names;
        std::vector<int> counts;
        for (std::size_t j = 0; j < keep.size(); ++j) {
            x.col(j) = d.x.col(keep[j]);
            names.push_back(d.feature_names[keep[j]]);
            counts.push_back(d.imputed_counts[keep[j]]);
        }
        d.x = std::move(x);
        d.feature_names = std::move(names);
        d.imputed_counts = std::move(counts);
    }
    return d;
}

Scaler fit_minmax(const Eigen::MatrixXd& x) {
    require(x.rows() >= 1, "fit_minmax: empty matrix");
    Scaler s;
    s.min = x.colwise().minCoeff();
    s.max = x.colwise().maxCoeff();
    return s;
}

Eigen::MatrixXd apply_minmax(const Eigen::MatrixXd& x, const Scaler& s) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const std::vector<double> row = row_vec(x, i);
        const std::vector<double> mn(s.min.data(), s.min.data() + s.min.size());
        const std::vector<double> mx(s.max.data(), s.max.data() + s.max.size());
        const std::vector<double> scaled = encode::minmax_normalize(row, mn, mx);
        for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = scaled[j];
    }
    return out;
}

std::pair<PcaModel, Eigen::MatrixXd> pca_fit_transform(const Eigen::MatrixXd& x, int k) {
    const Eigen::Index n = x.rows(), d = x.cols();
    require(n >= 2, "pca: need at least two rows");
    require(k >= 1 && k <= d, "pca: k must lie in [1, feature count]");

    PcaModel m;
    m.mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
    const double total_var = centered.squaredNorm() / static_cast<double>(n - 1);

    Eigen::VectorXd eigvals;
    Eigen::MatrixXd comps;  // feature x r, descending eigenvalue order
    if (d <= n) {
        Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        eigvals = es.eigenvalues().reverse();
        comps = es.eigenvectors().rowwise().reverse();
    } else {
        // Dual form: eigenvectors of the (n x n) Gram give the same leading
        // components when features outnumber samples.
        Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        eigvals = es.eigenvalues().reverse();
        Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
        comps.resize(d, eigvals.size());
        for (Eigen::Index i = 0; i < eigvals.size(); ++i) {
            if (eigvals[i] > 0.0)
                comps.col(i) = centered.transpose() * u.col(i) /
                               std::sqrt(static_cast<double>(n - 1) * eigvals[i]);
            else
                comps.col(i).setZero();
        }
    }

    const double rank_floor = std::max(eigvals.size() > 0 ? eigvals[0] : 0.0, 1e-300) * 1e-12;
    int rank = 0;
    for (Eigen::Index i = 0; i < eigvals.size(); ++i)
        if (eigvals[i] > rank_floor) ++rank;
    int k_eff = k;
    if (k_eff > rank) {
        warn("pipeline", "pca rank " + std::to_string(rank) + " below requested k=" +
                             std::to_string(k) + "; reducing");
        k_eff = std::max(rank, 1);
    }

    m.components.resize(d, k_eff);
    m.explained_ratio.resize(k_eff);
    for (int i = 0; i < k_eff; ++i) {
        Eigen::VectorXd v = comps.col(i);
        Eigen::Index argmax = 0;
        v.cwiseAbs().maxCoeff(&argmax);
        if (v[argmax] < 0.0) v = -v;
        m.components.col(i) = v;
        m.explained_ratio[i] = total_var > 0.0 ? std::max(eigvals[i], 0.0) / total_var : 0.0;
    }
    return {m, centered * m.components};
}

Eigen::MatrixXd pca_apply(const PcaModel& m, const Eigen::MatrixXd& x) {
    require(x.cols() == m.mean.size(), "pca_apply: dimension mismatch");
    return (x.rowwise() - m.mean.transpose()) * m.components;
}

SplitIndices split(const Dataset& d, int test_size, bool stratified, std::uint64_t seed) {
    const int n = static_cast<int>(d.x.rows());
    if (test_size < 1 || test_size >= n)
        throw ConfigError("test size must lie in [1, rows-1]");

    SplitIndices out;
    if (!stratified) {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        std::mt19937_64 rng(mix_seed(seed, 0x517));
        std::shuffle(idx.begin(), idx.end(), rng);
        out.test.assign(idx.begin(), idx.begin() + test_size);
        out.train.assign(idx.begin() + test_size, idx.end());
    } else {
        std::vector<int> neg, pos;
        for (int i = 0; i < n; ++i) (d.y[i] == 1 ? pos : neg).push_back(i);
        require(!neg.empty() && !pos.empty(), "stratified split needs both classes");
        std::mt19937_64 rng_neg(mix_seed(seed, 0x517, 1));
        std::mt19937_64 rng_pos(mix_seed(seed, 0x517, 2));
        std::shuffle(neg.begin(), neg.end(), rng_neg);
        std::shuffle(pos.begin(), pos.end(), rng_pos);

        const double frac_neg = static_cast<double>(neg.size()) / n;
        int t_neg = static_cast<int>(std::lround(test_size * frac_neg));
        int t_pos = test_size - t_neg;
        // keep at least one training sample per class
        const int max_neg = static_cast<int>(neg.size()) - 1;
        const int max_pos = static_cast<int>(pos.size()) - 1;
        if (t_neg > max_neg) {
            t_pos += t_neg - max_neg;
            t_neg = max_neg;
        }
        if (t_pos > max_pos) {
            t_neg += t_pos - max_pos;
            t_pos = max_pos;
        }
        require(t_neg >= 0 && t_pos >= 0 && t_neg <= max_neg && t_pos <= max_pos &&
                    t_neg + t_pos == test_size,
                "stratified split infeasible for the requested test size");

        out.test.assign(neg.begin(), neg.begin() + t_neg);
        out.test.insert(out.test.end(), pos.begin(), pos.begin() + t_pos);
        out.train.assign(neg.begin() + t_neg, neg.end());
        out.train.insert(out.train.end(), pos.begin() + t_pos, pos.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Dataset synth_dataset(int n, int dim, double anomaly_frac, std::uint64_t seed) {
    require(n >= 4, "synthetic dataset needs at least 4 rows");
    require(dim >= 2, "synthetic dataset needs at least 2 features");
    require(anomaly_frac > 0.0 && anomaly_frac < 1.0, "anomaly fraction must lie in (0,1)");

    const int n_attack = std::max(1, static_cast<int>(std::lround(n * anomaly_frac)));
    const int n_benign = n - n_attack;
    std::mt19937_64 rng(mix_seed(seed, 0xda7a));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double sigma_benign = 0.07;
    const double sigma_attack = 0.05;

    Dataset d;
    d.provenance = "synthetic";
    d.x.resize(n, dim);
    d.y.resize(n);
    for (int j = 0; j < dim; ++j) d.feature_names.push_back("f" + std::to_string(j));
    d.imputed_counts.assign(dim, 0);

    // Benign traffic is bimodal (two flanking clusters); attacks sit between
    // them, so no hyperplane separates the classes.
    for (int i = 0; i < n; ++i) {
        const bool attack = i >= n_benign;
        double center;
        if (attack)
            center = 0.5;
        else
            center = (i % 2 == 0) ? 0.25 : 0.75;
        const double sigma = attack ? sigma_attack : sigma_benign;
        for (int j = 0; j < dim; ++j)
            d.x(i, j) = std::clamp(center + sigma * gauss(rng), 0.0, 1.0);
        d.y[i] = attack ? 1 : -1;
    }

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng2(mix_seed(seed, 0xda7a, 2));
    std::shuffle(perm.begin(), perm.end(), rng2);
    Dataset shuffled = d;
    for (int i = 0; i < n; ++i) {
        shuffled.x.row(i) = d.x.row(perm[i]);
        shuffled.y[i] = d.y[perm[i]];
    }
    return shuffled;
}

void write_dataset_csv(const Dataset& d, std::ostream& os) {
    for (const auto& name : d.feature_names) os << name << ',';
    os << "label\n";
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.x.cols(); ++j) os << d.x(i, j) << ',';
        os << (d.y[i] == 1 ? "attack" : "normal") << '\n';
    }
}

std::vector<double> qwpt_feature_row(std::span<const double> x01,
                                     const ExperimentConfig& cfg) {
    qwpt::QwptConfig qc;
    qc.n_qubits = static_cast<int>(x01.size());
    qc.levels = std::min(cfg.qwpt_levels, qc.n_qubits - 1);
    qc.use_rz_phase = cfg.qwpt_rz;
    qc.style = cfg.qwpt_style;
    qc.execution = qwpt::ExecutionMode::ExactAmplitudes;
    const qwpt::WptFeatures w = qwpt::run_qwpt(encode::encode_product_ry(x01), qc);
    std::vector<double> row = w.f;
    row.insert(row.end(), w.subband_energy.begin(), w.subband_energy.end());
    row.push_back(w.wpee);
    return row;
}

namespace {

Eigen::MatrixXd build_feature_matrix_impl(const Dataset& d, const Eigen::MatrixXd& x01,
                                           const SplitIndices& idx,
                                           const ExperimentConfig& cfg) {
    Eigen::MatrixXd staged;
    if (cfg.feature_source == FeatureSource::Pca) {
        staged = x01;
    } else {
        const Eigen::Index n = x01.rows();
        std::vector<std::vector<double>> rows(n);
        parallel_for(n, cfg.jobs, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r)
                rows[r] = qwpt_feature_row(row_vec(x01, static_cast<Eigen::Index>(r)), cfg);
        });
        staged.resize(n, static_cast<Eigen::Index>(rows[0].size()));
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index j = 0; j < staged.cols(); ++j) staged(r, j) = rows[r][j];

        if (cfg.feature_source == FeatureSource::QwptMarkers) {
            // Sub-band energy block sits after f (2^n entries) in each row.
            const int n_q = static_cast<int>(x01.cols());
            const int levels = std::min(cfg.qwpt_levels, n_q - 1);
            const Eigen::Index e_off = Eigen::Index{1} << n_q;
            const Eigen::Index e_len = Eigen::Index{1} << levels;

            std::vector<double> mean_p(e_len, 0.0);
            int n_benign = 0;
            for (int r : idx.train) {
                if (d.y[r] != -1) continue;
                for (Eigen::Index t = 0; t < e_len; ++t) mean_p[t] += staged(r, e_off + t);
                ++n_benign;
            }
            require(n_benign > 0, "behavioral markers need benign training samples");
            for (double& v : mean_p) v /= n_benign;

            Eigen::MatrixXd extended(n, staged.cols() + 2);
            for (Eigen::Index r = 0; r < n; ++r) {
                std::vector<double> p(e_len);
                for (Eigen::Index t = 0; t < e_len; ++t) p[t] = staged(r, e_off + t);
                const behave::BehavioralMarkers m =
                    behave::markers_for_sample(p, mean_p, cfg.alpha_chi);
                const std::vector<double> row = row_vec(staged, r);
                const std::vector<double> ext = behave::append_markers(row, m);
                for (std::size_t j = 0; j < ext.size(); ++j)
                    extended(r, static_cast<Eigen::Index>(j)) = ext[j];
            }
            staged = std::move(extended);
        }
    }

    require(cfg.qubits <= staged.cols(),
            "feature dimension " + std::to_string(staged.cols()) +
                " below the requested qubit count " + std::to_string(cfg.qubits));
    Eigen::MatrixXd reduced;
    if (staged.cols() == cfg.qubits) {
        reduced = staged;
    } else {
        auto [model, projected] = pca_fit_transform(staged, cfg.qubits);
        require(projected.cols() == cfg.qubits,
                "pca could not supply the requested qubit count");
        reduced = projected;
    }

    return apply_minmax(reduced, fit_minmax(reduced));
}

kernel::KernelExecOptions exec_options(const ExperimentConfig& cfg, std::uint64_t seed) {
    kernel::KernelExecOptions opts;
    opts.exact = cfg.shots == 0;
    opts.shots = cfg.shots;
    opts.seed = seed;
    opts.jobs = cfg.jobs;
    if (cfg.regime == NoiseRegime::Depolarizing) {
        if (opts.exact && cfg.noise_p > 0.0)
            throw ConfigError("depolarizing noise requires shots >= 1");
        if (!opts.exact) opts.noise = sim::NoiseModel::depolarizing(cfg.noise_p);
    }
    return opts;
}

}  // namespace

Eigen::MatrixXd build_feature_matrix(const Dataset& d, const Eigen::MatrixXd& x01,
                                     const SplitIndices& idx, const ExperimentConfig& cfg) {
    return build_feature_matrix_impl(d, x01, idx, cfg);
}

ExperimentResult run_experiment(const Dataset& d, const ExperimentConfig& cfg) {
    ExperimentResult res;
    double t0 = now_seconds();

    const Dataset filled = with_stage("preprocess", [&] { return fill_missing(d); });
    const Eigen::MatrixXd x01 =
        with_stage("preprocess", [&] { return apply_minmax(filled.x, fit_minmax(filled.x)); });
    const SplitIndices idx = with_stage("preprocess", [&] {
        return split(filled, cfg.test_size, true, mix_seed(cfg.seed, 1));
    });
    res.timings.preprocess = now_seconds() - t0;

    t0 = now_seconds();
    const Eigen::MatrixXd features = with_stage(
        "features", [&] { return build_feature_matrix(filled, x01, idx, cfg); });
    const Eigen::MatrixXd f_train = take_rows(features, idx.train);
    const Eigen::MatrixXd f_test = take_rows(features, idx.test);
    std::vector<int> y_train, y_test;
    for (int r : idx.train) y_train.push_back(filled.y[r]);
    for (int r : idx.test) y_test.push_back(filled.y[r]);
    res.timings.features = now_seconds() - t0;

    t0 = now_seconds();
    const kernel::KernelExecOptions opts = exec_options(cfg, mix_seed(cfg.seed, 2));
    kernel::FeatureMapSpec map;
    if (cfg.trainable) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 3));
        std::uniform_real_distribution<double> unif(-std::numbers::pi, std::numbers::pi);
        std::vector<double> theta0(cfg.qubits);
        for (double& t : theta0) t = unif(rng);
        spsa::SpsaConfig sc = cfg.spsa_cfg;
        sc.seed = mix_seed(cfg.seed, 4);
        const spsa::LossFn loss = [&](std::span<const double> theta) {
            return svm::svc_loss(theta, f_train, y_train, cfg.reps, cfg.C, opts);
        };
        auto [theta_star, trace] =
            with_stage("kernel", [&] { return spsa::spsa_minimize(loss, theta0, sc); });
        res.trace = std::move(trace);
        map = kernel::FeatureMapSpec::trainable(std::move(theta_star), cfg.reps);
    } else if (cfg.map_kind == kernel::MapKind::Phase) {
        map = kernel::FeatureMapSpec::phase(cfg.qubits);
    } else {
        map = kernel::FeatureMapSpec::zz(cfg.qubits, cfg.reps);
    }
    res.final_map = map;
    const kernel::KernelMatrix k_raw =
        with_stage("kernel", [&] { return kernel::kernel_matrix(map, f_train, opts); });
    res.train_kernel = kernel::psd_repair(k_raw);
    res.timings.kernel = now_seconds() - t0;

    t0 = now_seconds();
    const svm::SvmModel model =
        with_stage("train", [&] { return svm::train_dual(res.train_kernel, y_train, cfg.C); });
    res.timings.train = now_seconds() - t0;

    t0 = now_seconds();
    const Eigen::MatrixXd k_test = with_stage("evaluate", [&] {
        return kernel::kernel_rows(map, f_test, f_train, opts,
                                   static_cast<std::uint64_t>(f_train.rows()));
    });
    res.truth = y_test;
    for (Eigen::Index r = 0; r < k_test.rows(); ++r)
        res.predictions.push_back(svm::predict(model, row_vec(k_test, r)));
    res.metrics = svm::evaluate(res.predictions, res.truth);

    if (cfg.with_linear_baseline) {
        kernel::KernelMatrix lin;
        lin.values = f_train * f_train.transpose();
        lin.meta.map = "linear";
        const kernel::KernelMatrix lin_repaired = kernel::psd_repair(lin);
        const svm::SvmModel lin_model = svm::train_dual(lin_repaired, y_train, cfg.C);
        const Eigen::MatrixXd lin_test = f_test * f_train.transpose();
        std::vector<int> lin_pred;
        for (Eigen::Index r = 0; r < lin_test.rows(); ++r)
            lin_pred.push_back(svm::predict(lin_model, row_vec(lin_test, r)));
        res.linear_baseline = svm::evaluate(lin_pred, y_test);
    }

    if (cfg.trainable && cfg.emit_penalty_series) {
        for (std::size_t t = 0; t < res.trace.iterations.size(); ++t) {
            const auto& it = res.trace.iterations[t];
            kernel::KernelExecOptions test_opts = opts;
            test_opts.seed = mix_seed(cfg.seed, 5, t);
            res.test_loss_series.push_back(
                svm::svc_loss(it.theta, f_test, y_test, cfg.reps, cfg.C, test_opts));
        }
    }
    res.timings.evaluate = now_seconds() - t0;
    return res;
}

std::vector<QubitSweepRow> sweep_qubits(const Dataset& d, const ExperimentConfig& base,
                                        const std::vector<int>& qubit_list) {
    std::vector<QubitSweepRow> rows;
    for (int q : qubit_list) {
        ExperimentConfig ideal = base;
        ideal.qubits = q;
        ideal.regime = NoiseRegime::Ideal;
        ideal.shots = 0;
        ideal.seed = mix_seed(base.seed, static_cast<std::uint64_t>(q));

        ExperimentConfig noisy = ideal;
        noisy.regime = NoiseRegime::Depolarizing;
        noisy.shots = base.shots > 0 ? base.shots : 1024;

        QubitSweepRow row;
        row.qubits = q;
        row.acc_noiseless = run_experiment(d, ideal).metrics.accuracy;
        row.acc_noisy = run_experiment(d, noisy).metrics.accuracy;
        rows.push_back(row);
    }
    return rows;
}

std::vector<KernelSweepRow> sweep_kernel_settings(const Dataset& d,
                                                  const ExperimentConfig& base,
                                                  const std::vector<KernelSetting>& settings) {
    std::vector<KernelSweepRow> rows;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        const KernelSetting& ks = settings[s];
        ExperimentConfig ideal = base;
        ideal.trainable = true;
        ideal.spsa_cfg.perturbation = ks.perturbation;
        ideal.spsa_cfg.learning_rate = ks.learning_rate;
        ideal.spsa_cfg.iterations = ks.iterations;
        ideal.regime = NoiseRegime::Ideal;
        ideal.shots = 0;
        ideal.emit_penalty_series = true;
        ideal.seed = mix_seed(base.seed, 0x4b, s);

        ExperimentConfig noisy = ideal;
        noisy.regime = NoiseRegime::Depolarizing;
        noisy.shots = base.shots > 0 ? base.shots : 1024;

        KernelSweepRow row;
        row.setting = ks;
        ExperimentResult ri = run_experiment(d, ideal);
        ExperimentResult rn = run_experiment(d, noisy);
        row.acc_noiseless = ri.metrics.accuracy;
        row.acc_noisy = rn.metrics.accuracy;
        row.trace_noiseless = std::move(ri.trace);
        row.trace_noisy = std::move(rn.trace);
        row.test_loss_noiseless = std::move(ri.test_loss_series);
        row.test_loss_noisy = std::move(rn.test_loss_series);
        rows.push_back(std::move(row));
    }
    return rows;
}

NoisePenaltyReport noise_penalty(std::span<const double> clean,
                                 std::span<const double> noisy) {
    require(clean.size() == noisy.size(), "noise_penalty: series lengths differ");
    require(!clean.empty(), "noise_penalty: empty series");
    NoisePenaltyReport r;
    r.delta.resize(clean.size());
    for (std::size_t t = 0; t < clean.size(); ++t) {
        r.delta[t] = noisy[t] - clean[t];
        r.a_noise += std::max(0.0, r.delta[t]);
    }
    r.clean_sorted.assign(clean.begin(), clean.end());
    r.noisy_sorted.assign(noisy.begin(), noisy.end());
    std::sort(r.clean_sorted.begin(), r.clean_sorted.end());
    std::sort(r.noisy_sorted.begin(), r.noisy_sorted.end());
    return r;
}

void write_metrics_csv(const svm::Metrics& m, std::ostream& os) {
    os << "accuracy,precision_neg,recall_neg,f1_neg,precision_pos,recall_pos,f1_pos,"
          "tn,fp,fn,tp\n";
    os << m.accuracy << ',' << m.precision[0] << ',' << m.recall[0] << ',' << m.f1[0] << ','
       << m.precision[1] << ',' << m.recall[1] << ',' << m.f1[1] << ','
       << m.confusion[0][0] << ',' << m.confusion[0][1] << ',' << m.confusion[1][0] << ','
       << m.confusion[1][1] << "\n";
}

void write_spsa_trace_csv(const spsa::SpsaTrace& trace, std::ostream& os) {
    os << "iteration,loss,step_norm,grad_norm,skipped\n";
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const auto& it = trace.iterations[i];
        os << i << ',' << it.loss << ',' << it.step_norm << ',' << it.grad_norm << ','
           << (it.skipped ? 1 : 0) << "\n";
    }
}

void write_noise_penalty_csv(const NoisePenaltyReport& r, std::ostream& os) {
    os << "step,delta,clean_sorted,noisy_sorted\n";
    for (std::size_t t = 0; t < r.delta.size(); ++t)
        os << t << ',' << r.delta[t] << ',' << r.clean_sorted[t] << ',' << r.noisy_sorted[t]
           << "\n";
    os << "# a_noise=" << r.a_noise << "\n";
}

}  // namespace qwave::pipeline
