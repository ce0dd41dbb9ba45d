#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "clad/autoencoder.hpp"
#include "clad/classifier.hpp"
#include "clad/datasets.hpp"
#include "clad/detector.hpp"
#include "clad/evaluation.hpp"
#include "clad/self_label.hpp"

namespace clad {

struct ScenarioConfig {
    std::string kind = "trimodal";  // trimodal | digits | mnist | csv
    std::string name = "CUR";       // catalog code for digit/image scenarios
    std::string data_dir = "data/mnist";
    std::string train_csv;
    std::string test_csv;
    std::vector<int> normal_labels;  // overrides the catalog; required for csv
    std::size_t train_limit = 0;     // 0 = use everything
    std::size_t test_limit = 0;
    std::size_t digits_per_class_train = 250;
    std::size_t digits_per_class_test = 100;
};

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "runs/exp";
    ScenarioConfig scenario;
    AutoencoderConfig autoencoder;
    std::size_t clusters = 10;
    std::size_t kmeans_restarts = 20;
    RefineConfig clustering;
    ClassifierTrainConfig classifier;
    DetectorConfig detector;
    bool detector_clamp_auto = true;  // take the clamp range from the training scaler
};

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// Materializes the configured scenario; deterministic in cfg.seed.
ScenarioBundle resolve_scenario(const ExperimentConfig& cfg);

enum class Stage { extract, cluster, classify, score, evaluate };

Stage stage_from_name(const std::string& name);
std::string stage_name(Stage st);

/// Runs one stage against the artifacts in cfg.out_dir. Missing upstream
/// artifacts raise an error naming the artifact and the stage that makes it.
void run_stage(Stage st, const ExperimentConfig& cfg);

/// Steps (1)-(4) plus evaluation, as the stage chain; persists models,
/// pseudo-label CSV, score CSV and the report under cfg.out_dir.
EvaluationReport run_pipeline(const ExperimentConfig& cfg);

struct AblationGrid {
    std::vector<std::size_t> cluster_counts;
    std::vector<std::size_t> hidden_dims;

    static AblationGrid appendix_defaults();  // clusters 2..20 step 2, hidden 10..100 step 10
};

struct AblationRow {
    std::size_t clusters = 0;
    std::size_t hidden_dim = 0;
    double auroc = 0.0;
    double runtime_seconds = 0.0;
};

/// One full pipeline run per (K, hidden_dim) setting. Rows are appended to
/// csv_path as they complete; a rerun resumes, keeping finished rows. Runs
/// are independent and may execute on `jobs` worker threads.
std::vector<AblationRow> ablation_sweep(const ExperimentConfig& base, const AblationGrid& grid,
                                        const std::string& csv_path, std::size_t jobs = 1);

std::vector<AblationRow> read_ablation_csv(const std::string& path);

}  // namespace clad
