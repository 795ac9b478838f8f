#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qwave/csvio.hpp"
#include "qwave/encode.hpp"
#include "qwave/pipeline.hpp"
#include "qwave/qwpt.hpp"

namespace fs = std::filesystem;
using namespace qwave;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out_dir;
    int jobs = 0;
};

struct DataOpts {
    std::string input;
    std::string preset = "synth";  // synth | botiot | iot23 | custom
    std::string label_column = "label";
    int synth_n = 150;
    int synth_dim = 8;
    double anomaly_frac = 0.5;
};

pipeline::LabelMapping synth_mapping() {
    pipeline::LabelMapping m;
    m.label_column = "label";
    m.values = {{"normal", -1}, {"attack", 1}};
    return m;
}

pipeline::Dataset load_data(const DataOpts& d, std::uint64_t seed) {
    if (d.input.empty())
        return pipeline::synth_dataset(d.synth_n, d.synth_dim, d.anomaly_frac, seed);
    if (d.preset == "botiot") return pipeline::load_csv(d.input, pipeline::botiot_preset());
    if (d.preset == "iot23") return pipeline::load_csv(d.input, pipeline::iot23_preset());
    if (d.preset == "synth") return pipeline::load_csv(d.input, synth_mapping());
    pipeline::LabelMapping m;
    m.label_column = d.label_column;
    m.values = {{"0", -1}, {"1", 1}, {"normal", -1}, {"attack", 1}};
    return pipeline::load_csv(d.input, m);
}

void add_data_opts(CLI::App* cmd, DataOpts& d) {
    cmd->add_option("--input", d.input, "input CSV of flow records; omit to use synthetic data");
    cmd->add_option("--preset", d.preset, "label preset: synth|botiot|iot23|custom")
        ->check(CLI::IsMember({"synth", "botiot", "iot23", "custom"}));
    cmd->add_option("--label-col", d.label_column, "label column for --preset custom");
    cmd->add_option("--synth-n", d.synth_n, "synthetic sample count");
    cmd->add_option("--synth-dim", d.synth_dim, "synthetic feature count");
    cmd->add_option("--anomaly-frac", d.anomaly_frac, "synthetic attack fraction");
}

fs::path ensure_out_dir(const GlobalOpts& g) {
    fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    return out;
}

// The only artifact that carries a timestamp, keeping every other output
// byte-reproducible.
void write_config_resolved(const fs::path& dir, const std::string& command,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
    auto out = open_out(dir / "config_resolved.txt");
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    out << "command=" << command << "\n";
    out << "timestamp=" << now << "\n";
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

struct ExperimentFlags {
    std::string source = "pca";
    int qubits = 8;
    std::string map = "zz";
    int reps = 2;
    bool trainable = false;
    double pr = 0.05, lr = 0.5;
    int iter = 10;
    std::string regime = "ideal";
    double noise_p = 0.01;
    std::uint64_t shots = 0;
    int test_size = 30;
    double c_param = 1.0;
    int levels = 2;
    bool no_rz = false;
    std::string style = "alg2";
    bool baseline = false;
};

void add_experiment_opts(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("--source", f.source, "feature source: pca|qwpt|qwpt-markers")
        ->check(CLI::IsMember({"pca", "qwpt", "qwpt-markers"}));
    cmd->add_option("--qubits", f.qubits, "kernel qubit count");
    cmd->add_option("--map", f.map, "feature map: zz|phase")->check(CLI::IsMember({"zz", "phase"}));
    cmd->add_option("--reps", f.reps, "feature map repetitions");
    cmd->add_flag("--trainable", f.trainable, "train kernel parameters with SPSA");
    cmd->add_option("--pr", f.pr, "SPSA perturbation (c0)");
    cmd->add_option("--lr", f.lr, "SPSA learning rate (a0)");
    cmd->add_option("--iter", f.iter, "SPSA iterations");
    cmd->add_option("--regime", f.regime, "noise regime: ideal|depolarizing")
        ->check(CLI::IsMember({"ideal", "depolarizing"}));
    cmd->add_option("--noise-p", f.noise_p, "depolarizing probability per gate");
    cmd->add_option("--shots", f.shots, "shots per kernel entry; 0 = exact");
    cmd->add_option("--test-size", f.test_size, "held-out test rows");
    cmd->add_option("--C", f.c_param, "SVM box constraint");
    cmd->add_option("--levels", f.levels, "QWPT decomposition levels");
    cmd->add_flag("--no-rz", f.no_rz, "drop the optional RZ(pi/4) phase gates");
    cmd->add_option("--style", f.style, "QWPT circuit style: alg2|butterfly")
        ->check(CLI::IsMember({"alg2", "butterfly"}));
    cmd->add_flag("--baseline", f.baseline, "also train a classical linear-kernel baseline");
}

pipeline::ExperimentConfig to_config(const ExperimentFlags& f, const GlobalOpts& g) {
    pipeline::ExperimentConfig cfg;
    if (f.source == "qwpt") cfg.feature_source = pipeline::FeatureSource::Qwpt;
    else if (f.source == "qwpt-markers") cfg.feature_source = pipeline::FeatureSource::QwptMarkers;
    else cfg.feature_source = pipeline::FeatureSource::Pca;
    cfg.qubits = f.qubits;
    cfg.map_kind = f.map == "phase" ? kernel::MapKind::Phase : kernel::MapKind::Zz;
    cfg.reps = f.reps;
    cfg.trainable = f.trainable;
    cfg.spsa_cfg.perturbation = f.pr;
    cfg.spsa_cfg.learning_rate = f.lr;
    cfg.spsa_cfg.iterations = f.iter;
    cfg.regime = f.regime == "depolarizing" ? pipeline::NoiseRegime::Depolarizing
                                            : pipeline::NoiseRegime::Ideal;
    cfg.noise_p = f.noise_p;
    cfg.shots = f.shots;
    cfg.test_size = f.test_size;
    cfg.C = f.c_param;
    cfg.qwpt_levels = f.levels;
    cfg.qwpt_rz = !f.no_rz;
    cfg.qwpt_style = f.style == "butterfly" ? qwpt::CircuitStyle::HaarButterfly
                                            : qwpt::CircuitStyle::PaperPairs;
    cfg.seed = g.seed;
    cfg.jobs = g.jobs;
    cfg.with_linear_baseline = f.baseline;
    return cfg;
}

std::vector<std::pair<std::string, std::string>> describe_flags(const ExperimentFlags& f,
                                                                const GlobalOpts& g,
                                                                const DataOpts& d) {
    return {{"source", f.source},
            {"qubits", std::to_string(f.qubits)},
            {"map", f.map},
            {"reps", std::to_string(f.reps)},
            {"trainable", f.trainable ? "1" : "0"},
            {"pr", std::to_string(f.pr)},
            {"lr", std::to_string(f.lr)},
            {"iter", std::to_string(f.iter)},
            {"regime", f.regime},
            {"noise_p", std::to_string(f.noise_p)},
            {"shots", std::to_string(f.shots)},
            {"test_size", std::to_string(f.test_size)},
            {"C", std::to_string(f.c_param)},
            {"levels", std::to_string(f.levels)},
            {"rz", f.no_rz ? "0" : "1"},
            {"style", f.style},
            {"seed", std::to_string(g.seed)},
            {"jobs", std::to_string(g.jobs)},
            {"input", d.input.empty() ? "(synthetic)" : d.input},
            {"synth_n", std::to_string(d.synth_n)},
            {"synth_dim", std::to_string(d.synth_dim)},
            {"anomaly_frac", std::to_string(d.anomaly_frac)}};
}

void write_features_csv(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                        std::ostream& os) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) os << "c" << j << ',';
    os << "label\n";
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) os << rows(i, j) << ',';
        os << (labels[static_cast<std::size_t>(i)] == 1 ? "attack" : "normal") << '\n';
    }
}

void write_model_csv(const svm::SvmModel& model, const kernel::FeatureMapSpec& map,
                     std::ostream& os) {
    os << "# kernel=" << map.describe() << "\n";
    os << "# map_kind="
       << (map.kind == kernel::MapKind::Zz
               ? "zz"
               : map.kind == kernel::MapKind::Phase ? "phase" : "trainable")
       << "\n";
    os << "# reps=" << map.reps << "\n";
    os << "# qubits=" << map.n_qubits << "\n";
    os << "# theta=";
    for (std::size_t i = 0; i < map.theta.size(); ++i) os << (i ? ";" : "") << map.theta[i];
    os << "\n";
    os << "# b=" << model.b << "\n";
    os << "# C=" << model.C << "\n";
    os << "index,alpha,y,support\n";
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
        const bool sv = model.alpha[i] > 1e-8;
        os << i << ',' << model.alpha[i] << ',' << model.y[i] << ',' << (sv ? 1 : 0) << '\n';
    }
}

std::vector<double> read_loss_series(const std::string& path) {
    const csvio::Table t = csvio::read_csv_file(path);
    int col = 0;
    for (std::size_t j = 0; j < t.header.size(); ++j)
        if (t.header[j] == "loss") col = static_cast<int>(j);
    std::vector<double> series;
    for (const auto& row : t.rows) {
        double v;
        if (static_cast<std::size_t>(col) < row.size() && csvio::parse_number(row[col], v))
            series.push_back(v);
    }
    if (series.empty()) throw ConfigError("no loss values in " + path);
    return series;
}

int cmd_synth_data(const GlobalOpts& g, const DataOpts& d, const std::string& out_name) {
    const pipeline::Dataset ds =
        pipeline::synth_dataset(d.synth_n, d.synth_dim, d.anomaly_frac, g.seed);
    const fs::path dir = ensure_out_dir(g);
    auto out = open_out(dir / out_name);
    pipeline::write_dataset_csv(ds, out);
    std::cout << "wrote " << (dir / out_name).string() << " (" << ds.x.rows() << " rows, "
              << ds.x.cols() << " features)\n";
    return 0;
}

int cmd_preprocess(const GlobalOpts& g, const DataOpts& d) {
    pipeline::Dataset ds = load_data(d, g.seed);
    ds = pipeline::fill_missing(std::move(ds));
    const pipeline::Scaler scaler = pipeline::fit_minmax(ds.x);
    const Eigen::MatrixXd x01 = pipeline::apply_minmax(ds.x, scaler);
    const behave::FeatureStats stats = behave::descriptive_stats(ds.x);

    const fs::path dir = ensure_out_dir(g);
    {
        auto out = open_out(dir / "preprocessed.csv");
        write_features_csv(x01, ds.y, out);
    }
    {
        auto out = open_out(dir / "stats.csv");
        out << "feature,mean,variance,skewness,kurtosis,imputed\n";
        for (Eigen::Index j = 0; j < ds.x.cols(); ++j)
            out << ds.feature_names[j] << ',' << stats.mean[j] << ',' << stats.variance[j]
                << ',' << stats.skewness[j] << ',' << stats.kurtosis[j] << ','
                << ds.imputed_counts[j] << '\n';
    }
    {
        auto out = open_out(dir / "correlation.csv");
        for (Eigen::Index i = 0; i < stats.correlation.rows(); ++i) {
            for (Eigen::Index j = 0; j < stats.correlation.cols(); ++j)
                out << (j ? "," : "") << stats.correlation(i, j);
            out << '\n';
        }
    }
    write_config_resolved(dir, "preprocess", {{"seed", std::to_string(g.seed)}});
    std::cout << "preprocessed " << ds.x.rows() << " rows, " << ds.x.cols() << " features\n";
    return 0;
}

int cmd_features(const GlobalOpts& g, const DataOpts& d, const ExperimentFlags& f,
                 bool markers, bool recursive, const std::string& dump_state) {
    pipeline::Dataset ds = pipeline::fill_missing(load_data(d, g.seed));
    const Eigen::MatrixXd x01 = pipeline::apply_minmax(ds.x, pipeline::fit_minmax(ds.x));
    const pipeline::ExperimentConfig cfg = to_config(f, g);

    const int n_q = static_cast<int>(x01.cols());
    const int levels = std::min(cfg.qwpt_levels, n_q - 1);

    std::vector<std::vector<double>> rows(x01.rows());
    for (Eigen::Index r = 0; r < x01.rows(); ++r) {
        std::vector<double> x(x01.cols());
        for (Eigen::Index j = 0; j < x01.cols(); ++j) x[j] = x01(r, j);
        if (recursive) {
            qwpt::QwptConfig qc;
            qc.n_qubits = n_q;
            qc.levels = levels;
            qc.use_rz_phase = cfg.qwpt_rz;
            qc.style = cfg.qwpt_style;
            std::vector<double> flat;
            for (const auto& node :
                 qwpt::recursive_decompose(encode::encode_product_ry(x), qc)) {
                flat.insert(flat.end(), node.f.begin(), node.f.end());
                flat.insert(flat.end(), node.subband_energy.begin(),
                            node.subband_energy.end());
                flat.push_back(node.wpee);
            }
            rows[r] = std::move(flat);
        } else {
            rows[r] = pipeline::qwpt_feature_row(x, cfg);
        }
    }

    if (markers && !recursive) {
        const Eigen::Index e_off = Eigen::Index{1} << n_q;
        const std::size_t e_len = std::size_t{1} << levels;
        std::vector<double> mean_p(e_len, 0.0);
        int n_benign = 0;
        for (Eigen::Index r = 0; r < x01.rows(); ++r) {
            if (ds.y[r] != -1) continue;
            for (std::size_t t = 0; t < e_len; ++t) mean_p[t] += rows[r][e_off + t];
            ++n_benign;
        }
        require(n_benign > 0, "behavioral markers need benign samples");
        for (double& v : mean_p) v /= n_benign;
        for (auto& row : rows) {
            std::vector<double> p(row.begin() + e_off, row.begin() + e_off + e_len);
            const auto m = behave::markers_for_sample(p, mean_p, cfg.alpha_chi);
            row = behave::append_markers(row, m);
        }
    }

    const fs::path dir = ensure_out_dir(g);
    {
        auto out = open_out(dir / "features.csv");
        Eigen::MatrixXd mat(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(rows[0].size()));
        for (Eigen::Index i = 0; i < mat.rows(); ++i)
            for (Eigen::Index j = 0; j < mat.cols(); ++j) mat(i, j) = rows[i][j];
        write_features_csv(mat, ds.y, out);
    }
    if (!dump_state.empty()) {
        std::vector<double> x(x01.cols());
        for (Eigen::Index j = 0; j < x01.cols(); ++j) x[j] = x01(x01.rows() - 1, j);
        qwpt::QwptConfig qc;
        qc.n_qubits = n_q;
        qc.levels = levels;
        qc.use_rz_phase = cfg.qwpt_rz;
        qc.style = cfg.qwpt_style;
        sim::Circuit circ = encode::product_ry_prepare(encode::encode_product_ry(x).angles);
        const sim::Circuit transform =
            cfg.qwpt_style == qwpt::CircuitStyle::PaperPairs
                ? qwpt::build_qwpt_circuit(qc)
                : qwpt::build_butterfly_circuit(n_q, levels, cfg.qwpt_rz);
        for (const auto& gate : transform.gates) circ.push(gate);
        auto out = open_out(dump_state);
        sim::write_statevector_csv(sim::run_exact(circ), out);
    }
    write_config_resolved(dir, "features", describe_flags(f, g, d));
    std::cout << "wrote features.csv (" << rows.size() << " rows, " << rows[0].size()
              << " columns)\n";
    return 0;
}

int cmd_kernel(const GlobalOpts& g, const DataOpts& d, const ExperimentFlags& f) {
    pipeline::Dataset ds = pipeline::fill_missing(load_data(d, g.seed));
    const Eigen::MatrixXd x01 = pipeline::apply_minmax(ds.x, pipeline::fit_minmax(ds.x));
    const pipeline::ExperimentConfig cfg = to_config(f, g);

    pipeline::SplitIndices all;
    for (Eigen::Index i = 0; i < x01.rows(); ++i) all.train.push_back(static_cast<int>(i));
    const Eigen::MatrixXd feats = pipeline::build_feature_matrix(ds, x01, all, cfg);

    kernel::KernelExecOptions opts;
    opts.exact = cfg.shots == 0;
    opts.shots = cfg.shots;
    opts.seed = mix_seed(cfg.seed, 2);
    opts.jobs = g.jobs;
    if (cfg.regime == pipeline::NoiseRegime::Depolarizing) {
        if (opts.exact && cfg.noise_p > 0.0)
            throw ConfigError("depolarizing noise requires --shots >= 1");
        if (!opts.exact) opts.noise = sim::NoiseModel::depolarizing(cfg.noise_p);
    }
    const kernel::FeatureMapSpec map = cfg.map_kind == kernel::MapKind::Phase
                                           ? kernel::FeatureMapSpec::phase(cfg.qubits)
                                           : kernel::FeatureMapSpec::zz(cfg.qubits, cfg.reps);
    const kernel::KernelMatrix k = kernel::kernel_matrix(map, feats, opts);

    const fs::path dir = ensure_out_dir(g);
    auto out = open_out(dir / "kernel.csv");
    kernel::write_kernel_csv(k, out);
    write_config_resolved(dir, "kernel", describe_flags(f, g, d));
    std::cout << "wrote kernel.csv (" << k.values.rows() << "x" << k.values.cols() << ")\n";
    return 0;
}

int cmd_train(const GlobalOpts& g, const DataOpts& d, const ExperimentFlags& f,
              bool one_class, double nu) {
    const pipeline::Dataset ds = load_data(d, g.seed);
    const pipeline::ExperimentConfig cfg = to_config(f, g);
    const fs::path dir = ensure_out_dir(g);

    if (one_class) {
        const pipeline::Dataset filled = pipeline::fill_missing(ds);
        const Eigen::MatrixXd x01 =
            pipeline::apply_minmax(filled.x, pipeline::fit_minmax(filled.x));
        const pipeline::SplitIndices idx =
            pipeline::split(filled, cfg.test_size, true, mix_seed(cfg.seed, 1));
        const Eigen::MatrixXd feats = pipeline::build_feature_matrix(filled, x01, idx, cfg);

        std::vector<int> benign_train;
        for (int r : idx.train)
            if (filled.y[r] == -1) benign_train.push_back(r);
        require(benign_train.size() >= 2, "one-class training needs benign rows");
        Eigen::MatrixXd f_train(static_cast<Eigen::Index>(benign_train.size()), feats.cols());
        for (std::size_t i = 0; i < benign_train.size(); ++i)
            f_train.row(i) = feats.row(benign_train[i]);
        Eigen::MatrixXd f_test(static_cast<Eigen::Index>(idx.test.size()), feats.cols());
        std::vector<int> y_test;
        for (std::size_t i = 0; i < idx.test.size(); ++i) {
            f_test.row(i) = feats.row(idx.test[i]);
            y_test.push_back(filled.y[idx.test[i]]);
        }

        kernel::KernelExecOptions opts;
        opts.seed = mix_seed(cfg.seed, 2);
        opts.jobs = g.jobs;
        const kernel::FeatureMapSpec map = kernel::FeatureMapSpec::zz(cfg.qubits, cfg.reps);
        const kernel::KernelMatrix k =
            kernel::psd_repair(kernel::kernel_matrix(map, f_train, opts));
        const svm::OneClassModel model = svm::train_one_class(k, nu);
        const Eigen::MatrixXd k_test =
            kernel::kernel_rows(map, f_test, f_train, opts, f_train.rows());

        std::vector<int> pred;
        for (Eigen::Index r = 0; r < k_test.rows(); ++r) {
            std::vector<double> row(k_test.cols());
            for (Eigen::Index j = 0; j < k_test.cols(); ++j) row[j] = k_test(r, j);
            pred.push_back(svm::one_class_decision(model, row) < 0.0 ? 1 : -1);
        }
        const svm::Metrics metrics = svm::evaluate(pred, y_test);
        auto out = open_out(dir / "metrics.csv");
        pipeline::write_metrics_csv(metrics, out);
        write_config_resolved(dir, "train-one-class", describe_flags(f, g, d));
        std::cout << "one-class accuracy " << metrics.accuracy << " (nu=" << nu << ")\n";
        return 0;
    }

    const pipeline::ExperimentResult res = pipeline::run_experiment(ds, cfg);
    {
        auto out = open_out(dir / "metrics.csv");
        pipeline::write_metrics_csv(res.metrics, out);
    }
    {
        auto out = open_out(dir / "kernel_train.csv");
        kernel::write_kernel_csv(res.train_kernel, out);
    }
    if (!res.trace.iterations.empty()) {
        auto out = open_out(dir / "spsa_trace.csv");
        pipeline::write_spsa_trace_csv(res.trace, out);
    }
    {
        // persist the model by re-deriving it from the repaired train kernel
        const pipeline::Dataset filled = pipeline::fill_missing(ds);
        const pipeline::SplitIndices idx =
            pipeline::split(filled, cfg.test_size, true, mix_seed(cfg.seed, 1));
        std::vector<int> y_train;
        for (int r : idx.train) y_train.push_back(filled.y[r]);
        const svm::SvmModel model = svm::train_dual(res.train_kernel, y_train, cfg.C);
        auto out = open_out(dir / "model.csv");
        write_model_csv(model, res.final_map, out);

        const Eigen::MatrixXd x01 =
            pipeline::apply_minmax(filled.x, pipeline::fit_minmax(filled.x));
        const Eigen::MatrixXd feats = pipeline::build_feature_matrix(filled, x01, idx, cfg);
        Eigen::MatrixXd f_train(static_cast<Eigen::Index>(idx.train.size()), feats.cols());
        std::vector<int> lbl_train;
        for (std::size_t i = 0; i < idx.train.size(); ++i) {
            f_train.row(i) = feats.row(idx.train[i]);
            lbl_train.push_back(filled.y[idx.train[i]]);
        }
        Eigen::MatrixXd f_test(static_cast<Eigen::Index>(idx.test.size()), feats.cols());
        std::vector<int> lbl_test;
        for (std::size_t i = 0; i < idx.test.size(); ++i) {
            f_test.row(i) = feats.row(idx.test[i]);
            lbl_test.push_back(filled.y[idx.test[i]]);
        }
        auto tr = open_out(dir / "train_features.csv");
        write_features_csv(f_train, lbl_train, tr);
        auto te = open_out(dir / "test_features.csv");
        write_features_csv(f_test, lbl_test, te);
    }
    auto kv = describe_flags(f, g, d);
    kv.emplace_back("t_preprocess", std::to_string(res.timings.preprocess));
    kv.emplace_back("t_features", std::to_string(res.timings.features));
    kv.emplace_back("t_kernel", std::to_string(res.timings.kernel));
    kv.emplace_back("t_train", std::to_string(res.timings.train));
    kv.emplace_back("t_evaluate", std::to_string(res.timings.evaluate));
    write_config_resolved(dir, "train", kv);
    std::cout << "accuracy " << res.metrics.accuracy;
    if (res.linear_baseline) std::cout << " (linear baseline " << res.linear_baseline->accuracy << ")";
    std::cout << "\n";
    return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& model_path,
                 const std::string& train_features, const std::string& test_features,
                 std::uint64_t shots, double noise_p) {
    // parse the model header block
    std::ifstream in(model_path);
    if (!in) throw ConfigError("cannot open model: " + model_path);
    std::string line, map_kind = "zz", theta_str;
    int reps = 2, qubits = 0;
    double b = 0.0, c_param = 1.0;
    std::vector<double> alpha;
    std::vector<int> y;
    while (std::getline(in, line)) {
        if (line.rfind("# map_kind=", 0) == 0) map_kind = line.substr(11);
        else if (line.rfind("# reps=", 0) == 0) reps = std::stoi(line.substr(7));
        else if (line.rfind("# qubits=", 0) == 0) qubits = std::stoi(line.substr(9));
        else if (line.rfind("# theta=", 0) == 0) theta_str = line.substr(8);
        else if (line.rfind("# b=", 0) == 0) b = std::stod(line.substr(4));
        else if (line.rfind("# C=", 0) == 0) c_param = std::stod(line.substr(4));
        else if (!line.empty() && line[0] != '#' && line.find("index,") != 0) {
            std::istringstream row(line);
            std::string cell;
            std::getline(row, cell, ',');
            std::getline(row, cell, ',');
            alpha.push_back(std::stod(cell));
            std::getline(row, cell, ',');
            y.push_back(std::stoi(cell));
        }
    }
    require(!alpha.empty() && qubits > 0, "model file is incomplete");

    auto load_features = [](const std::string& path, std::vector<int>& labels) {
        const pipeline::Dataset d = pipeline::load_csv(path, synth_mapping());
        labels = d.y;
        return d.x;
    };
    std::vector<int> y_train_file, y_test;
    const Eigen::MatrixXd f_train = load_features(train_features, y_train_file);
    const Eigen::MatrixXd f_test = load_features(test_features, y_test);
    require(f_train.rows() == static_cast<Eigen::Index>(alpha.size()),
            "training features do not match the model size");

    kernel::FeatureMapSpec map;
    if (map_kind == "phase") {
        map = kernel::FeatureMapSpec::phase(qubits);
    } else if (map_kind == "trainable") {
        std::vector<double> theta;
        std::istringstream ts(theta_str);
        std::string cell;
        while (std::getline(ts, cell, ';'))
            if (!cell.empty()) theta.push_back(std::stod(cell));
        map = kernel::FeatureMapSpec::trainable(std::move(theta), reps);
    } else {
        map = kernel::FeatureMapSpec::zz(qubits, reps);
    }

    svm::SvmModel model;
    model.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
    model.y = y;
    model.b = b;
    model.C = c_param;

    kernel::KernelExecOptions opts;
    opts.exact = shots == 0;
    opts.shots = shots;
    opts.seed = mix_seed(g.seed, 2);
    opts.jobs = g.jobs;
    if (noise_p > 0.0) {
        require(shots >= 1, "noise requires --shots >= 1");
        opts.noise = sim::NoiseModel::depolarizing(noise_p);
    }
    const Eigen::MatrixXd k_test =
        kernel::kernel_rows(map, f_test, f_train, opts, f_train.rows());

    std::vector<int> pred;
    for (Eigen::Index r = 0; r < k_test.rows(); ++r) {
        std::vector<double> row(k_test.cols());
        for (Eigen::Index j = 0; j < k_test.cols(); ++j) row[j] = k_test(r, j);
        pred.push_back(svm::predict(model, row));
    }
    const svm::Metrics metrics = svm::evaluate(pred, y_test);
    const fs::path dir = ensure_out_dir(g);
    auto out = open_out(dir / "metrics.csv");
    pipeline::write_metrics_csv(metrics, out);
    std::cout << "accuracy " << metrics.accuracy << "\n";
    return 0;
}

int cmd_sweep_qubits(const GlobalOpts& g, const DataOpts& d, const ExperimentFlags& f,
                     std::vector<int> qubit_list) {
    if (qubit_list.empty()) qubit_list = {8, 10, 12, 15};
    const pipeline::Dataset ds = load_data(d, g.seed);
    const pipeline::ExperimentConfig base = to_config(f, g);
    const auto rows = pipeline::sweep_qubits(ds, base, qubit_list);

    const fs::path dir = ensure_out_dir(g);
    auto out = open_out(dir / "sweep_qubits.csv");
    out << "qubits,acc_noiseless,acc_noisy\n";
    for (const auto& r : rows)
        out << r.qubits << ',' << r.acc_noiseless << ',' << r.acc_noisy << '\n';
    write_config_resolved(dir, "sweep-qubits", describe_flags(f, g, d));
    std::cout << "wrote sweep_qubits.csv (" << rows.size() << " rows x 2 regimes)\n";
    return 0;
}

int cmd_sweep_kernel(const GlobalOpts& g, const DataOpts& d, const ExperimentFlags& f,
                     const std::vector<double>& pr_list, const std::vector<double>& lr_list,
                     int iter) {
    std::vector<pipeline::KernelSetting> settings;
    if (pr_list.empty() && lr_list.empty()) {
        settings = {{0.05, 0.05, iter}, {0.05, 0.5, iter}, {0.05, 1.0, iter}};
    } else {
        const std::vector<double> prs = pr_list.empty() ? std::vector<double>{0.05} : pr_list;
        const std::vector<double> lrs = lr_list.empty() ? std::vector<double>{0.5} : lr_list;
        for (double pr : prs)
            for (double lr : lrs) settings.push_back({pr, lr, iter});
    }
    const pipeline::Dataset ds = load_data(d, g.seed);
    const pipeline::ExperimentConfig base = to_config(f, g);
    const auto rows = pipeline::sweep_kernel_settings(ds, base, settings);

    const fs::path dir = ensure_out_dir(g);
    auto out = open_out(dir / "sweep_kernel.csv");
    out << "pr,lr,iter,acc_noiseless,acc_noisy,noise_penalty\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto penalty =
            pipeline::noise_penalty(r.test_loss_noiseless, r.test_loss_noisy);
        out << r.setting.perturbation << ',' << r.setting.learning_rate << ','
            << r.setting.iterations << ',' << r.acc_noiseless << ',' << r.acc_noisy << ','
            << penalty.a_noise << '\n';
        {
            auto t = open_out(dir / ("spsa_trace_" + std::to_string(i) + "_ideal.csv"));
            pipeline::write_spsa_trace_csv(r.trace_noiseless, t);
        }
        {
            auto t = open_out(dir / ("spsa_trace_" + std::to_string(i) + "_noisy.csv"));
            pipeline::write_spsa_trace_csv(r.trace_noisy, t);
        }
        {
            auto t = open_out(dir / ("noise_penalty_" + std::to_string(i) + ".csv"));
            pipeline::write_noise_penalty_csv(penalty, t);
        }
    }
    write_config_resolved(dir, "sweep-kernel", describe_flags(f, g, d));
    std::cout << "wrote sweep_kernel.csv (" << rows.size() << " settings x 2 regimes)\n";
    return 0;
}

int cmd_validate_qwpt(const GlobalOpts& g, int samples, int dim, int levels, bool rz) {
    require(samples >= 1, "need at least one sample");
    std::mt19937_64 rng(mix_seed(g.seed, 0x9a));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> xs(samples, std::vector<double>(dim));
    for (auto& x : xs)
        for (double& v : x) v = unif(rng);

    qwpt::QwptConfig cfg;
    cfg.n_qubits = static_cast<int>(std::ceil(std::log2(std::max(dim, 2))));
    cfg.levels = levels;
    cfg.use_rz_phase = rz;
    const double err = qwpt::validate_qwpt_against_classical(xs, cfg);
    std::cout << "mean_l2_error " << err << " over " << samples << " samples (dim=" << dim
              << ", levels=" << levels << ", rz=" << (rz ? 1 : 0) << ")\n";
    return err < 1e-6 ? 0 : 1;
}

int cmd_noise_report(const GlobalOpts& g, const std::string& clean_path,
                     const std::string& noisy_path) {
    const std::vector<double> clean = read_loss_series(clean_path);
    const std::vector<double> noisy = read_loss_series(noisy_path);
    const auto report = pipeline::noise_penalty(clean, noisy);
    const fs::path dir = ensure_out_dir(g);
    auto out = open_out(dir / "noise_penalty.csv");
    pipeline::write_noise_penalty_csv(report, out);
    std::cout << "a_noise " << report.a_noise << " over " << report.delta.size()
              << " steps\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid quantum-classical network intrusion detection pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "plain key=value configuration file");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "output directory")
        ->envname("QWAVE_OUT_DIR");
    app.add_option("--jobs", g.jobs, "worker threads for kernel assembly (0 = auto)");

    DataOpts data;
    ExperimentFlags flags;

    auto* synth = app.add_subcommand("synth-data", "generate the synthetic benchmark CSV");
    std::string synth_out = "synth.csv";
    synth->add_option("--n", data.synth_n, "sample count");
    synth->add_option("--dim", data.synth_dim, "feature count");
    synth->add_option("--anomaly-frac", data.anomaly_frac, "attack fraction");
    synth->add_option("--out", synth_out, "output file name");

    auto* preprocess = app.add_subcommand("preprocess", "impute, normalize and profile a dataset");
    add_data_opts(preprocess, data);

    auto* features = app.add_subcommand("features", "QWPT feature extraction to CSV");
    add_data_opts(features, data);
    add_experiment_opts(features, flags);
    bool features_markers = false, features_recursive = false;
    std::string dump_state;
    features->add_flag("--markers", features_markers, "append behavioral markers");
    features->add_flag("--recursive", features_recursive,
                       "recursive decomposition instead of the multi-level circuit");
    features->add_option("--dump-state", dump_state,
                         "write the last sample's pre-measurement statevector CSV here");

    auto* kern = app.add_subcommand("kernel", "assemble a kernel matrix CSV");
    add_data_opts(kern, data);
    add_experiment_opts(kern, flags);

    auto* train = app.add_subcommand("train", "run the full experiment and persist artifacts");
    add_data_opts(train, data);
    add_experiment_opts(train, flags);
    bool one_class = false;
    double nu = 0.1;
    train->add_flag("--one-class", one_class, "train the benign-only one-class variant");
    train->add_option("--nu", nu, "one-class contamination bound");

    auto* evaluate = app.add_subcommand("evaluate", "score persisted features with a saved model");
    std::string model_path, train_feat, test_feat;
    std::uint64_t eval_shots = 0;
    double eval_noise = 0.0;
    evaluate->add_option("--model", model_path, "model.csv from train")->required();
    evaluate->add_option("--train-features", train_feat, "train_features.csv from train")
        ->required();
    evaluate->add_option("--test-features", test_feat, "features to score")->required();
    evaluate->add_option("--shots", eval_shots, "shots per kernel entry; 0 = exact");
    evaluate->add_option("--noise-p", eval_noise, "depolarizing probability");

    auto* sweepq = app.add_subcommand("sweep-qubits", "accuracy table across qubit counts");
    add_data_opts(sweepq, data);
    add_experiment_opts(sweepq, flags);
    std::vector<int> qubit_list;
    sweepq->add_option("--qubit-list", qubit_list, "qubit counts (default 8 10 12 15)");

    auto* sweepk = app.add_subcommand("sweep-kernel", "trainable-kernel hyperparameter sweep");
    add_data_opts(sweepk, data);
    add_experiment_opts(sweepk, flags);
    std::vector<double> pr_list, lr_list;
    int sweep_iter = 10;
    sweepk->add_option("--pr-list", pr_list, "perturbation values");
    sweepk->add_option("--lr-list", lr_list, "learning-rate values");
    sweepk->add_option("--sweep-iter", sweep_iter, "SPSA iterations per cell");

    auto* validate = app.add_subcommand("validate-qwpt",
                                        "compare circuit amplitudes against the classical transform");
    int v_samples = 100, v_dim = 8, v_levels = 2;
    bool v_rz = false;
    validate->add_option("--samples", v_samples, "random sample count");
    validate->add_option("--dim", v_dim, "sample dimension (padded to a power of two)");
    validate->add_option("--levels", v_levels, "decomposition levels");
    validate->add_flag("--rz", v_rz, "keep the optional phase gates (expected to fail)");

    auto* noise_report = app.add_subcommand("noise-report", "noise penalty from two loss series");
    std::string clean_path, noisy_path;
    noise_report->add_option("--clean", clean_path, "clean loss series CSV")->required();
    noise_report->add_option("--noisy", noisy_path, "noisy loss series CSV")->required();

    CLI11_PARSE(app, argc, argv);

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (synth->parsed()) return cmd_synth_data(g, data, synth_out);
        if (preprocess->parsed()) return cmd_preprocess(g, data);
        if (features->parsed())
            return cmd_features(g, data, flags, features_markers, features_recursive, dump_state);
        if (kern->parsed()) return cmd_kernel(g, data, flags);
        if (train->parsed()) return cmd_train(g, data, flags, one_class, nu);
        if (evaluate->parsed())
            return cmd_evaluate(g, model_path, train_feat, test_feat, eval_shots, eval_noise);
        if (sweepq->parsed()) return cmd_sweep_qubits(g, data, flags, qubit_list);
        if (sweepk->parsed()) return cmd_sweep_kernel(g, data, flags, pr_list, lr_list, sweep_iter);
        if (validate->parsed()) return cmd_validate_qwpt(g, v_samples, v_dim, v_levels, v_rz);
        if (noise_report->parsed()) return cmd_noise_report(g, clean_path, noisy_path);
    } catch (const ConfigError& e) {
        std::cerr << "ERROR " << stage << ": " << e.what() << "\n";
        return 1;
    } catch (const ContractError& e) {
        std::cerr << "ERROR " << stage << ": " << e.what() << "\n";
        return 1;
    } catch (const InternalError& e) {
        std::cerr << "ERROR internal: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "ERROR internal: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "ERROR cli: no subcommand dispatched\n";
    return 1;
}
