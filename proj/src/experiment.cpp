#include "clad/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "clad/digits.hpp"
#include "clad/rng.hpp"
#include "clad/serialize.hpp"

namespace clad {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scenario_config_to_json(const ScenarioConfig& s) {
    return json{{"kind", s.kind},
                {"name", s.name},
                {"data_dir", s.data_dir},
                {"train_csv", s.train_csv},
                {"test_csv", s.test_csv},
                {"normal_labels", s.normal_labels},
                {"train_limit", s.train_limit},
                {"test_limit", s.test_limit},
                {"digits_per_class_train", s.digits_per_class_train},
                {"digits_per_class_test", s.digits_per_class_test}};
}

void scenario_config_from_json(const json& j, ScenarioConfig& s) {
    s.kind = j.value("kind", s.kind);
    s.name = j.value("name", s.name);
    s.data_dir = j.value("data_dir", s.data_dir);
    s.train_csv = j.value("train_csv", s.train_csv);
    s.test_csv = j.value("test_csv", s.test_csv);
    if (j.contains("normal_labels")) s.normal_labels = j.at("normal_labels").get<std::vector<int>>();
    s.train_limit = j.value("train_limit", s.train_limit);
    s.test_limit = j.value("test_limit", s.test_limit);
    s.digits_per_class_train = j.value("digits_per_class_train", s.digits_per_class_train);
    s.digits_per_class_test = j.value("digits_per_class_test", s.digits_per_class_test);
}

}  // namespace

json experiment_config_to_json(const ExperimentConfig& cfg) {
    return json{
        {"seed", cfg.seed},
        {"out_dir", cfg.out_dir},
        {"scenario", scenario_config_to_json(cfg.scenario)},
        {"autoencoder",
         {{"hidden_dim", cfg.autoencoder.hidden_dim},
          {"epochs", cfg.autoencoder.epochs},
          {"batch_size", cfg.autoencoder.batch_size},
          {"optimizer", opt_algo_name(cfg.autoencoder.optimizer)},
          {"learning_rate", cfg.autoencoder.learning_rate},
          {"dropout_keep", cfg.autoencoder.dropout_keep},
          {"arch", arch_preset_name(cfg.autoencoder.arch)},
          {"mlp_width", cfg.autoencoder.mlp_width},
          {"scale_inputs", cfg.autoencoder.scale_inputs}}},
        {"clustering",
         {{"clusters", cfg.clusters},
          {"kmeans_restarts", cfg.kmeans_restarts},
          {"epochs", cfg.clustering.epochs},
          {"learning_rate", cfg.clustering.learning_rate},
          {"momentum", cfg.clustering.momentum},
          {"batch_size", cfg.clustering.batch_size}}},
        {"classifier",
         {{"epochs", cfg.classifier.epochs},
          {"batch_size", cfg.classifier.batch_size},
          {"optimizer", opt_algo_name(cfg.classifier.optimizer)},
          {"learning_rate", cfg.classifier.learning_rate},
          {"arch", arch_preset_name(cfg.classifier.arch)},
          {"mlp_width", cfg.classifier.mlp_width},
          {"mlp_width2", cfg.classifier.mlp_width2}}},
        {"detector",
         {{"temperature", cfg.detector.temperature},
          {"epsilon", cfg.detector.epsilon},
          {"delta", cfg.detector.delta},
          {"clamp_lo", cfg.detector.clamp_lo},
          {"clamp_hi", cfg.detector.clamp_hi},
          {"clamp_auto", cfg.detector_clamp_auto}}}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("scenario")) scenario_config_from_json(j.at("scenario"), cfg.scenario);
    if (j.contains("autoencoder")) {
        const json& a = j.at("autoencoder");
        cfg.autoencoder.hidden_dim = a.value("hidden_dim", cfg.autoencoder.hidden_dim);
        cfg.autoencoder.epochs = a.value("epochs", cfg.autoencoder.epochs);
        cfg.autoencoder.batch_size = a.value("batch_size", cfg.autoencoder.batch_size);
        if (a.contains("optimizer")) {
            cfg.autoencoder.optimizer = opt_algo_from_name(a.at("optimizer").get<std::string>());
        }
        cfg.autoencoder.learning_rate = a.value("learning_rate", cfg.autoencoder.learning_rate);
        cfg.autoencoder.dropout_keep = a.value("dropout_keep", cfg.autoencoder.dropout_keep);
        if (a.contains("arch")) cfg.autoencoder.arch = arch_preset_from_name(a.at("arch").get<std::string>());
        cfg.autoencoder.mlp_width = a.value("mlp_width", cfg.autoencoder.mlp_width);
        cfg.autoencoder.scale_inputs = a.value("scale_inputs", cfg.autoencoder.scale_inputs);
    }
    if (j.contains("clustering")) {
        const json& c = j.at("clustering");
        cfg.clusters = c.value("clusters", cfg.clusters);
        cfg.kmeans_restarts = c.value("kmeans_restarts", cfg.kmeans_restarts);
        cfg.clustering.epochs = c.value("epochs", cfg.clustering.epochs);
        cfg.clustering.learning_rate = c.value("learning_rate", cfg.clustering.learning_rate);
        cfg.clustering.momentum = c.value("momentum", cfg.clustering.momentum);
        cfg.clustering.batch_size = c.value("batch_size", cfg.clustering.batch_size);
    }
    if (j.contains("classifier")) {
        const json& c = j.at("classifier");
        cfg.classifier.epochs = c.value("epochs", cfg.classifier.epochs);
        cfg.classifier.batch_size = c.value("batch_size", cfg.classifier.batch_size);
        if (c.contains("optimizer")) {
            cfg.classifier.optimizer = opt_algo_from_name(c.at("optimizer").get<std::string>());
        }
        cfg.classifier.learning_rate = c.value("learning_rate", cfg.classifier.learning_rate);
        if (c.contains("arch")) cfg.classifier.arch = arch_preset_from_name(c.at("arch").get<std::string>());
        cfg.classifier.mlp_width = c.value("mlp_width", cfg.classifier.mlp_width);
        cfg.classifier.mlp_width2 = c.value("mlp_width2", cfg.classifier.mlp_width2);
    }
    if (j.contains("detector")) {
        cfg.detector = detector_config_from_json(j.at("detector"));
        cfg.detector_clamp_auto = j.at("detector").value("clamp_auto", cfg.detector_clamp_auto);
    }
    return cfg;
}

namespace {

void limit_scenario(ScenarioBundle& b, std::size_t train_limit, std::size_t test_limit) {
    if (train_limit > 0 && b.scenario.x_train.size() > train_limit) {
        b.scenario.x_train.resize(train_limit);
        b.oracle.train_latent.resize(train_limit);
    }
    if (test_limit > 0 && b.scenario.x_test.size() > test_limit) {
        b.scenario.x_test.resize(test_limit);
        b.scenario.y_test.resize(test_limit);
        b.oracle.test_latent.resize(test_limit);
    }
}

ScenarioSpec resolve_spec(const ScenarioConfig& s, const std::string& catalog_dataset) {
    if (!s.normal_labels.empty()) return {s.name.empty() ? "custom" : s.name, catalog_dataset, s.normal_labels};
    return find_catalog_entry(catalog_dataset, s.name).to_spec();
}

}  // namespace

ScenarioBundle resolve_scenario(const ExperimentConfig& cfg) {
    const ScenarioConfig& s = cfg.scenario;
    std::uint64_t data_seed = derive_seed(cfg.seed, "dataset");
    ScenarioBundle bundle;
    if (s.kind == "trimodal") {
        // three tight normal modes; one abnormal mode sits between two of them,
        // the other between the remaining pair, so a single-centroid method
        // ranks both as more normal than the normal modes themselves
        std::vector<GaussianMode> train_modes = {
            {{0.0, 0.0}, {0.25, 0.25}, 100, 1},
            {{8.0, 0.0}, {0.25, 0.25}, 100, 2},
            {{4.0, 7.0}, {0.25, 0.25}, 100, 3},
        };
        std::vector<GaussianMode> test_modes = {
            {{0.0, 0.0}, {0.25, 0.25}, 100, 1},
            {{8.0, 0.0}, {0.25, 0.25}, 100, 2},
            {{4.0, 7.0}, {0.25, 0.25}, 100, 3},
            {{4.0, 0.0}, {0.25, 0.25}, 100, 4},
            {{6.0, 3.5}, {0.25, 0.25}, 100, 5},
        };
        LabeledDataset train = synth_gaussian_mixture(train_modes, derive_seed(data_seed, "train"));
        train.split = "train";
        LabeledDataset test = synth_gaussian_mixture(test_modes, derive_seed(data_seed, "test"));
        test.split = "test";
        bundle = build_scenario(train, test, {"trimodal", "synthetic", {1, 2, 3}});
    } else if (s.kind == "digits") {
        LabeledDataset train = synth_digits(s.digits_per_class_train, data_seed, "train");
        LabeledDataset test = synth_digits(s.digits_per_class_test, data_seed, "test");
        bundle = build_scenario(train, test, resolve_spec(s, "mnist"));
    } else if (s.kind == "mnist") {
        LabeledDataset train = load_idx(s.data_dir + "/train-images-idx3-ubyte",
                                        s.data_dir + "/train-labels-idx1-ubyte");
        train.split = "train";
        LabeledDataset test = load_idx(s.data_dir + "/t10k-images-idx3-ubyte",
                                       s.data_dir + "/t10k-labels-idx1-ubyte");
        test.split = "test";
        bundle = build_scenario(train, test, resolve_spec(s, "mnist"));
    } else if (s.kind == "csv") {
        if (s.train_csv.empty() || s.test_csv.empty()) {
            throw std::invalid_argument("csv scenario needs train_csv and test_csv paths");
        }
        if (s.normal_labels.empty()) {
            throw std::invalid_argument("csv scenario needs an explicit normal_labels set");
        }
        LabeledDataset train = import_labeled_vectors(s.train_csv);
        train.split = "train";
        LabeledDataset test = import_labeled_vectors(s.test_csv);
        test.split = "test";
        bundle = build_scenario(train, test, {s.name.empty() ? "csv" : s.name, "csv", s.normal_labels});
    } else {
        throw std::invalid_argument("unknown scenario kind '" + s.kind +
                                    "' (expected trimodal, digits, mnist or csv)");
    }
    limit_scenario(bundle, s.train_limit, s.test_limit);
    if (bundle.scenario.x_train.empty()) {
        throw std::invalid_argument("scenario has no training samples after limits");
    }
    return bundle;
}

Stage stage_from_name(const std::string& name) {
    if (name == "extract") return Stage::extract;
    if (name == "cluster") return Stage::cluster;
    if (name == "classify") return Stage::classify;
    if (name == "score") return Stage::score;
    if (name == "evaluate") return Stage::evaluate;
    throw std::invalid_argument("unknown stage '" + name +
                                "' (expected extract, cluster, classify, score or evaluate)");
}

std::string stage_name(Stage st) {
    switch (st) {
        case Stage::extract: return "extract";
        case Stage::cluster: return "cluster";
        case Stage::classify: return "classify";
        case Stage::score: return "score";
        case Stage::evaluate: return "evaluate";
    }
    return "?";
}

namespace {

std::string artifact_path(const ExperimentConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void require_artifact(const ExperimentConfig& cfg, const std::string& name,
                      const std::string& producer_stage) {
    if (!fs::exists(artifact_path(cfg, name))) {
        throw std::runtime_error("missing artifact '" + name + "' in " + cfg.out_dir + "; run stage " +
                                 producer_stage + " first");
    }
}

void write_config_echo(const ExperimentConfig& cfg) {
    save_json_file(experiment_config_to_json(cfg), artifact_path(cfg, "config.json"));
}

void stage_extract(const ExperimentConfig& cfg) {
    ScenarioBundle bundle = resolve_scenario(cfg);
    AutoencoderConfig ae_cfg = cfg.autoencoder;
    ae_cfg.seed = derive_seed(cfg.seed, "autoencoder");
    AutoencoderModel model = train_autoencoder(bundle.scenario.x_train, ae_cfg);
    save_json_file(autoencoder_to_json(model), artifact_path(cfg, "autoencoder.json"));
}

void stage_cluster(const ExperimentConfig& cfg) {
    require_artifact(cfg, "autoencoder.json", "extract");
    ScenarioBundle bundle = resolve_scenario(cfg);
    AutoencoderModel ae = autoencoder_from_json(load_json_file(artifact_path(cfg, "autoencoder.json")));

    Tensor features = encode_batch(ae, bundle.scenario.x_train);
    ClusterModel clusters = init_centroids(features, cfg.clusters, derive_seed(cfg.seed, "kmeans"),
                                           cfg.kmeans_restarts);
    RefineConfig refine_cfg = cfg.clustering;
    refine_cfg.seed = derive_seed(cfg.seed, "refine");
    RefineResult refined = refine(ae, clusters, bundle.scenario.x_train, refine_cfg);

    json artifact{{"format", "clad-model"},
                  {"kind", "selflabel"},
                  {"version", 1},
                  {"autoencoder", autoencoder_to_json(ae)},
                  {"clusters", cluster_model_to_json(clusters)},
                  {"kl_history", refined.kl_history},
                  {"reseed_epochs", refined.reseeds}};
    save_json_file(artifact, artifact_path(cfg, "selflabel.json"));

    PseudoLabels labels = assign_pseudo_labels(ae, clusters, bundle.scenario.x_train);
    export_pseudo_labels_csv(labels, artifact_path(cfg, "pseudo_labels.csv"));
}

void stage_classify(const ExperimentConfig& cfg) {
    require_artifact(cfg, "autoencoder.json", "extract");
    require_artifact(cfg, "pseudo_labels.csv", "cluster");
    ScenarioBundle bundle = resolve_scenario(cfg);
    AutoencoderModel ae = autoencoder_from_json(load_json_file(artifact_path(cfg, "autoencoder.json")));
    PseudoLabels labels = import_pseudo_labels_csv(artifact_path(cfg, "pseudo_labels.csv"));
    if (labels.labels.size() != bundle.scenario.x_train.size()) {
        throw std::runtime_error("pseudo_labels.csv covers " + std::to_string(labels.labels.size()) +
                                 " samples but the scenario has " +
                                 std::to_string(bundle.scenario.x_train.size()));
    }
    ClassifierTrainConfig cls_cfg = cfg.classifier;
    cls_cfg.seed = derive_seed(cfg.seed, "classifier");
    ClassifierModel model = train_classifier(bundle.scenario.x_train, labels, cls_cfg, ae.scaler);
    save_json_file(classifier_to_json(model), artifact_path(cfg, "classifier.json"));
}

DetectorConfig effective_detector(const ExperimentConfig& cfg, const InputScaler& scaler) {
    DetectorConfig det = cfg.detector;
    if (cfg.detector_clamp_auto) {
        det.clamp_lo = scaler.lo;
        det.clamp_hi = scaler.hi > scaler.lo ? scaler.hi : scaler.lo + 1.0;
    }
    return det;
}

void stage_score(const ExperimentConfig& cfg) {
    require_artifact(cfg, "classifier.json", "classify");
    ScenarioBundle bundle = resolve_scenario(cfg);
    ClassifierModel model = classifier_from_json(load_json_file(artifact_path(cfg, "classifier.json")));
    DetectorConfig det = effective_detector(cfg, model.scaler);

    std::size_t n = bundle.scenario.x_test.size();
    std::vector<double> s(n);
    std::vector<int> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        AnomalyScore as = score(model, bundle.scenario.x_test[i], det);
        s[i] = as.s;
        pred[i] = as.predicted_class;
    }
    write_scores_csv(artifact_path(cfg, "scores.csv"), s, pred, bundle.scenario.y_test);
}

void stage_evaluate(const ExperimentConfig& cfg) {
    require_artifact(cfg, "scores.csv", "score");
    ScoredTestSet set = read_scores_csv(artifact_path(cfg, "scores.csv"));

    EvaluationReport report;
    report.auroc_value = auroc(set);
    report.n_normal = set.count(0);
    report.n_abnormal = set.count(1);
    report.histogram = evidence_histogram(set);
    // delta grid from observed score quantiles, so the sweep resolves the
    // narrow confidence band produced by large temperatures
    std::vector<double> scores;
    scores.reserve(set.samples.size());
    for (const auto& s : set.samples) scores.push_back(1.0 - s.evidence);
    std::sort(scores.begin(), scores.end());
    std::vector<double> grid{0.0, 1.0};
    std::size_t steps = std::min<std::size_t>(scores.size(), 512);
    for (std::size_t i = 0; i < steps; ++i) {
        grid.push_back(scores[i * scores.size() / steps]);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    report.youden = threshold_sweep(set, grid).youden;
    report.config_echo = experiment_config_to_json(cfg);

    if (fs::exists(artifact_path(cfg, "autoencoder.json"))) {
        ScenarioBundle bundle = resolve_scenario(cfg);
        AutoencoderModel ae =
            autoencoder_from_json(load_json_file(artifact_path(cfg, "autoencoder.json")));
        ScoredTestSet baseline = one_class_baseline(ae, bundle.scenario.x_train,
                                                    bundle.scenario.x_test, bundle.scenario.y_test);
        report.baseline_auroc = auroc(baseline);
    }
    save_json_file(report_to_json(report), artifact_path(cfg, "report.json"));
}

}  // namespace

void run_stage(Stage st, const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    write_config_echo(cfg);
    try {
        switch (st) {
            case Stage::extract: stage_extract(cfg); break;
            case Stage::cluster: stage_cluster(cfg); break;
            case Stage::classify: stage_classify(cfg); break;
            case Stage::score: stage_score(cfg); break;
            case Stage::evaluate: stage_evaluate(cfg); break;
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("stage " + stage_name(st) + ": " + e.what());
    }
}

EvaluationReport run_pipeline(const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    for (Stage st : {Stage::extract, Stage::cluster, Stage::classify, Stage::score, Stage::evaluate}) {
        run_stage(st, cfg);
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string report_path = (fs::path(cfg.out_dir) / "report.json").string();
    json j = load_json_file(report_path);
    j["runtime_seconds"] = seconds;
    save_json_file(j, report_path);
    return report_from_json(j);
}

AblationGrid AblationGrid::appendix_defaults() {
    AblationGrid g;
    for (std::size_t k = 2; k <= 20; k += 2) g.cluster_counts.push_back(k);
    for (std::size_t h = 10; h <= 100; h += 10) g.hidden_dims.push_back(h);
    return g;
}

std::vector<AblationRow> read_ablation_csv(const std::string& path) {
    std::vector<AblationRow> rows;
    std::ifstream in(path);
    if (!in) return rows;
    std::string line;
    if (!std::getline(in, line)) return rows;  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        AblationRow r;
        if (ss >> r.clusters >> r.hidden_dim >> r.auroc >> r.runtime_seconds) rows.push_back(r);
    }
    return rows;
}

namespace {

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "clusters,hidden_dim,auroc,runtime_seconds\n";
    char buf[64];
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.auroc);
        out << r.clusters << "," << r.hidden_dim << "," << buf << "," << r.runtime_seconds << "\n";
    }
}

}  // namespace

std::vector<AblationRow> ablation_sweep(const ExperimentConfig& base, const AblationGrid& grid,
                                        const std::string& csv_path, std::size_t jobs) {
    if (grid.cluster_counts.empty() || grid.hidden_dims.empty()) {
        throw std::invalid_argument("ablation_sweep: empty grid");
    }
    if (jobs == 0) jobs = 1;

    std::map<std::pair<std::size_t, std::size_t>, AblationRow> done;
    for (const AblationRow& r : read_ablation_csv(csv_path)) done[{r.clusters, r.hidden_dim}] = r;

    struct Setting {
        std::size_t k, h;
    };
    std::vector<Setting> todo;
    for (std::size_t k : grid.cluster_counts) {
        for (std::size_t h : grid.hidden_dims) {
            if (!done.count({k, h})) todo.push_back({k, h});
        }
    }

    std::mutex mu;
    std::size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            Setting s{};
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= todo.size()) return;
                s = todo[next++];
            }
            ExperimentConfig cfg = base;
            cfg.clusters = s.k;
            cfg.autoencoder.hidden_dim = s.h;
            cfg.out_dir = (fs::path(base.out_dir) / "ablation" /
                           ("k" + std::to_string(s.k) + "_h" + std::to_string(s.h)))
                              .string();
            auto t0 = std::chrono::steady_clock::now();
            EvaluationReport report = run_pipeline(cfg);
            AblationRow row{s.k, s.h, report.auroc_value,
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
            {
                std::lock_guard<std::mutex> lock(mu);
                done[{s.k, s.h}] = row;
                // incremental append keeps completed rows across interruptions
                std::vector<AblationRow> snapshot;
                for (std::size_t k : grid.cluster_counts) {
                    for (std::size_t h : grid.hidden_dims) {
                        auto it = done.find({k, h});
                        if (it != done.end()) snapshot.push_back(it->second);
                    }
                }
                write_ablation_csv(csv_path, snapshot);
            }
        }
    };

    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < std::min(jobs, todo.size() == 0 ? std::size_t(1) : todo.size()); ++t) {
        threads.emplace_back(worker);
    }
    for (auto& t : threads) t.join();

    std::vector<AblationRow> rows;
    for (std::size_t k : grid.cluster_counts) {
        for (std::size_t h : grid.hidden_dims) {
            auto it = done.find({k, h});
            if (it == done.end()) throw std::logic_error("ablation_sweep: missing row after sweep");
            rows.push_back(it->second);
        }
    }
    write_ablation_csv(csv_path, rows);
    return rows;
}

}  // namespace clad
