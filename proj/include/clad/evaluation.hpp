#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "clad/autoencoder.hpp"

namespace clad {

/// Per-sample anomaly evidence (higher = more abnormal) with the true binary
/// label (0 normal, 1 abnormal). CLAD scores enter as evidence a = 1 - s.
struct ScoredSample {
    double evidence = 0.0;
    int label = 0;
};

struct ScoredTestSet {
    std::vector<ScoredSample> samples;

    std::size_t count(int label) const;
};

/// P(evidence_abnormal > evidence_normal) + 1/2 P(tie), computed by sorting.
/// Throws if either class is missing.
double auroc(const ScoredTestSet& set);

/// Centroid-distance one-class baseline: evidence is the Euclidean distance of
/// the latent feature to the mean of the encoded training set.
ScoredTestSet one_class_baseline(const AutoencoderModel& ae, const std::vector<Tensor>& x_tr,
                                 const std::vector<Tensor>& x_te, const std::vector<int>& y_te);

struct ThresholdPoint {
    double delta = 0.0;  // threshold on the confidence score s = 1 - evidence
    double tpr = 0.0;
    double fpr = 0.0;
    double accuracy = 0.0;
};

struct ThresholdSweep {
    std::vector<ThresholdPoint> points;
    ThresholdPoint youden;  // maximizes tpr - fpr
};

/// Hard-decision sweep: a sample is flagged abnormal iff s <= delta, i.e.
/// evidence >= 1 - delta.
ThresholdSweep threshold_sweep(const ScoredTestSet& set, const std::vector<double>& delta_grid);

struct Histogram {
    std::vector<double> bin_edges;          // size bins + 1
    std::vector<std::size_t> normal;        // per-bin counts, label 0
    std::vector<std::size_t> abnormal;      // per-bin counts, label 1
};

Histogram evidence_histogram(const ScoredTestSet& set, std::size_t bins = 20);

struct EvaluationReport {
    double auroc_value = 0.0;
    double baseline_auroc = -1.0;  // < 0 when the baseline was not run
    std::size_t n_normal = 0;
    std::size_t n_abnormal = 0;
    Histogram histogram;
    ThresholdPoint youden;
    nlohmann::json config_echo;
    double runtime_seconds = 0.0;
};

nlohmann::json report_to_json(const EvaluationReport& r);
EvaluationReport report_from_json(const nlohmann::json& j);

void write_scores_csv(const std::string& path, const std::vector<double>& s,
                      const std::vector<int>& predicted_class, const std::vector<int>& true_label);
ScoredTestSet read_scores_csv(const std::string& path);

}  // namespace clad
