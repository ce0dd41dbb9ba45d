#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "clad/experiment.hpp"
#include "clad/serialize.hpp"

using namespace clad;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string scenario;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t clusters = 0;
    std::size_t hidden_dim = 0;
    double temperature = 0.0;
    double epsilon = -1.0;
    std::size_t train_limit = 0;
    std::size_t test_limit = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "experiment config JSON; flags override file values");
    cmd->add_option("--scenario", f.scenario,
                    "scenario selector: trimodal | digits:CODE | mnist:CODE | csv "
                    "(codes are catalog entries such as CUR, STR, MIX)");
    cmd->add_option("--seed", f.seed, "root seed; every stage derives its own stream from it");
    cmd->add_option("--out", f.out_dir, "output directory for artifacts and reports");
    cmd->add_option("--clusters", f.clusters, "cluster count K (= pseudo-class count L)");
    cmd->add_option("--hidden-dim", f.hidden_dim, "latent feature dimension");
    cmd->add_option("--temperature", f.temperature, "detector temperature T");
    cmd->add_option("--epsilon", f.epsilon, "detector input-perturbation magnitude");
    cmd->add_option("--train-limit", f.train_limit, "cap on training samples (0 = all)");
    cmd->add_option("--test-limit", f.test_limit, "cap on test samples (0 = all)");
}

ExperimentConfig build_config(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg;
    if (!f.config_path.empty()) {
        cfg = experiment_config_from_json(load_json_file(f.config_path));
    }
    if (cmd->count("--scenario")) {
        std::string sel = f.scenario;
        auto colon = sel.find(':');
        if (colon == std::string::npos) {
            cfg.scenario.kind = sel;
        } else {
            cfg.scenario.kind = sel.substr(0, colon);
            cfg.scenario.name = sel.substr(colon + 1);
        }
    }
    if (cmd->count("--seed")) cfg.seed = f.seed;
    if (cmd->count("--out")) cfg.out_dir = f.out_dir;
    if (cmd->count("--clusters")) cfg.clusters = f.clusters;
    if (cmd->count("--hidden-dim")) cfg.autoencoder.hidden_dim = f.hidden_dim;
    if (cmd->count("--temperature")) cfg.detector.temperature = f.temperature;
    if (cmd->count("--epsilon")) cfg.detector.epsilon = f.epsilon;
    if (cmd->count("--train-limit")) cfg.scenario.train_limit = f.train_limit;
    if (cmd->count("--test-limit")) cfg.scenario.test_limit = f.test_limit;
    return cfg;
}

void run_stage_timed(Stage st, const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    std::cout << "[" << stage_name(st) << "] running..." << std::flush;
    run_stage(st, cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << " done (" << std::fixed << std::setprecision(1) << secs << " s)\n";
    std::cout.unsetf(std::ios::fixed);
}

void print_report(const EvaluationReport& r) {
    std::printf("AUROC            %.4f\n", r.auroc_value);
    if (r.baseline_auroc >= 0.0) {
        std::printf("baseline AUROC   %.4f  (one-class centroid distance)\n", r.baseline_auroc);
    }
    std::printf("test set         %zu normal / %zu abnormal\n", r.n_normal, r.n_abnormal);
    std::printf("youden delta     %.3f  (tpr %.3f, fpr %.3f, accuracy %.3f)\n", r.youden.delta,
                r.youden.tpr, r.youden.fpr, r.youden.accuracy);
    if (r.runtime_seconds > 0.0) std::printf("runtime          %.1f s\n", r.runtime_seconds);
}

std::vector<std::size_t> parse_grid_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty()) out.push_back(static_cast<std::size_t>(std::stoul(cell)));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLAD: confidence-based self-labeling anomaly detection"};
    app.require_subcommand(1);

    CommonFlags run_flags, stage_flags, ablate_flags;
    std::string stage_arg;
    std::string grid_file, clusters_grid, hidden_grid;
    std::size_t jobs = 1;
    std::string report_dir, report_file;

    CLI::App* cmd_run = app.add_subcommand("run", "run the full pipeline and report AUROC");
    add_common_flags(cmd_run, run_flags);

    CLI::App* cmd_stage = app.add_subcommand("stage", "run a single pipeline stage against --out");
    cmd_stage->add_option("stage", stage_arg, "extract | cluster | classify | score | evaluate")
        ->required();
    add_common_flags(cmd_stage, stage_flags);

    CLI::App* cmd_ablate = app.add_subcommand("ablate", "sweep cluster count / hidden dim over full runs");
    add_common_flags(cmd_ablate, ablate_flags);
    cmd_ablate->add_option("--grid", grid_file, "JSON grid file: {cluster_counts: [...], hidden_dims: [...]}");
    cmd_ablate->add_option("--clusters-grid", clusters_grid, "comma list of cluster counts");
    cmd_ablate->add_option("--hidden-grid", hidden_grid, "comma list of hidden dims");
    cmd_ablate->add_option("--jobs", jobs, "parallel pipeline workers (independent runs)");

    CLI::App* cmd_report = app.add_subcommand("report", "print the report of a finished run");
    cmd_report->add_option("--out", report_dir, "run directory containing report.json");
    cmd_report->add_option("--report", report_file, "path to a report.json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            ExperimentConfig cfg = build_config(cmd_run, run_flags);
            auto t0 = std::chrono::steady_clock::now();
            for (Stage st : {Stage::extract, Stage::cluster, Stage::classify, Stage::score,
                             Stage::evaluate}) {
                run_stage_timed(st, cfg);
            }
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::string report_path = (std::filesystem::path(cfg.out_dir) / "report.json").string();
            nlohmann::json j = load_json_file(report_path);
            j["runtime_seconds"] = secs;
            save_json_file(j, report_path);
            print_report(report_from_json(j));
            std::cout << "artifacts in " << cfg.out_dir << "\n";
        } else if (cmd_stage->parsed()) {
            ExperimentConfig cfg = build_config(cmd_stage, stage_flags);
            run_stage_timed(stage_from_name(stage_arg), cfg);
        } else if (cmd_ablate->parsed()) {
            ExperimentConfig cfg = build_config(cmd_ablate, ablate_flags);
            AblationGrid grid = AblationGrid::appendix_defaults();
            if (!grid_file.empty()) {
                nlohmann::json j = load_json_file(grid_file);
                grid.cluster_counts = j.value("cluster_counts", grid.cluster_counts);
                grid.hidden_dims = j.value("hidden_dims", grid.hidden_dims);
            }
            if (cmd_ablate->count("--clusters-grid")) grid.cluster_counts = parse_grid_list(clusters_grid);
            if (cmd_ablate->count("--hidden-grid")) grid.hidden_dims = parse_grid_list(hidden_grid);
            if (cmd_ablate->count("--hidden-dim")) grid.hidden_dims = {cfg.autoencoder.hidden_dim};

            std::string csv = (std::filesystem::path(cfg.out_dir) / "ablation.csv").string();
            std::filesystem::create_directories(cfg.out_dir);
            std::cout << "sweeping " << grid.cluster_counts.size() * grid.hidden_dims.size()
                      << " settings with " << jobs << " worker(s); resuming from " << csv << "\n";
            std::vector<AblationRow> rows = ablation_sweep(cfg, grid, csv, jobs);
            std::printf("%-10s %-12s %-10s %s\n", "clusters", "hidden_dim", "auroc", "runtime_s");
            for (const AblationRow& r : rows) {
                std::printf("%-10zu %-12zu %-10.4f %.1f\n", r.clusters, r.hidden_dim, r.auroc,
                            r.runtime_seconds);
            }
            std::cout << "table written to " << csv << "\n";
        } else if (cmd_report->parsed()) {
            std::string path = !report_file.empty()
                                   ? report_file
                                   : (std::filesystem::path(report_dir) / "report.json").string();
            if (report_file.empty() && report_dir.empty()) {
                throw std::runtime_error("report: pass --out DIR or --report FILE");
            }
            print_report(report_from_json(load_json_file(path)));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
