#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clad/tensor.hpp"

namespace clad {

/// Samples with latent class labels. The labels are oracle-side information:
/// pipeline modules only ever see the stripped Scenario type below.
struct LabeledDataset {
    std::vector<Tensor> samples;
    std::vector<int> labels;
    std::string split;  // "train" | "test"

    std::size_t size() const { return samples.size(); }
};

/// Reads an IDX image/label file pair (big-endian magics 0x00000803 and
/// 0x00000801, unsigned byte payload). Pixels are scaled to [0, 1].
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Writes the dataset in the same IDX layout (values quantized to bytes).
void write_idx(const LabeledDataset& ds, const std::string& images_path,
               const std::string& labels_path);

struct GaussianMode {
    std::vector<double> mean;
    std::vector<double> var_diag;
    std::size_t count = 0;
    int label = 0;
};

/// Seeded mixture sampler with exact per-mode counts.
LabeledDataset synth_gaussian_mixture(const std::vector<GaussianMode>& modes, std::uint64_t seed);

/// Normal super-category: the latent labels treated as normal.
struct ScenarioSpec {
    std::string name;
    std::string dataset;
    std::vector<int> normal_labels;
};

/// Pipeline-facing view: unlabeled training samples plus the binary-labeled
/// test set. Carries no latent class information.
struct Scenario {
    std::string name;
    std::vector<Tensor> x_train;
    std::vector<Tensor> x_test;
    std::vector<int> y_test;  // 0 normal, 1 abnormal
};

/// Evaluation-only view of the latent class labels ("only the oracle is able
/// to access this").
struct ScenarioOracle {
    std::vector<int> normal_labels;
    std::vector<int> train_latent;
    std::vector<int> test_latent;
};

struct ScenarioBundle {
    Scenario scenario;
    ScenarioOracle oracle;
};

/// X_tr = train samples whose label is in the normal set (labels stripped);
/// X_te = all test samples with binary labels.
ScenarioBundle build_scenario(const LabeledDataset& train, const LabeledDataset& test,
                              const ScenarioSpec& spec);

struct CatalogEntry {
    std::string dataset;
    std::string code;
    std::string description;
    std::vector<int> labels;                // canonical ids; empty when only names are defined
    std::vector<std::string> label_names;

    ScenarioSpec to_spec() const;
};

/// The shipped super-category tables for MNIST, GTSRB, CIFAR-10 and
/// Tiny-ImageNet. One-class scenarios are expressible as singleton specs.
const std::vector<CatalogEntry>& builtin_scenario_tables();

/// Catalog lookup by dataset + code; throws with the known codes on miss.
const CatalogEntry& find_catalog_entry(const std::string& dataset, const std::string& code);

/// Generic labeled-vector CSV: one row per sample, "label,v1,...,vd" with a
/// constant d; values are taken as-is. Errors carry line numbers.
LabeledDataset import_labeled_vectors(const std::string& path);
void export_labeled_vectors(const LabeledDataset& ds, const std::string& path);

}  // namespace clad
