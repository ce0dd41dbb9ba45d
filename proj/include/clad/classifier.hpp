#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "clad/network.hpp"
#include "clad/optimizer.hpp"
#include "clad/scaler.hpp"
#include "clad/self_label.hpp"

namespace clad {

struct ClassifierTrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    OptAlgo optimizer = OptAlgo::adam;
    double learning_rate = 0.0001;
    ArchPreset arch = ArchPreset::mlp;
    std::size_t mlp_width = 256;
    std::size_t mlp_width2 = 128;
    std::uint64_t seed = 1;
};

struct ClassifierModel {
    Network net;
    std::size_t num_classes = 0;           // L
    std::vector<std::size_t> input_shape;  // per-sample shape seen at training
    InputScaler scaler;                    // same preprocessing as the feature extractor
    std::vector<double> accuracy_history;  // per-epoch training accuracy
};

/// Supervised cross-entropy training on (X_tr, pseudo-labels). Requires at
/// least two distinct labels. Shuffling is seeded; per-epoch training accuracy
/// is recorded.
ClassifierModel train_classifier(const std::vector<Tensor>& x_tr, const PseudoLabels& labels,
                                 const ClassifierTrainConfig& cfg, const InputScaler& scaler);

/// Raw logits of one sample, length L; no softmax applied. Pure.
Tensor predict_logits(const ClassifierModel& model, const Tensor& x);
Tensor predict_logits_batch(const ClassifierModel& model, const Tensor& batch);

nlohmann::json classifier_to_json(const ClassifierModel& model);
ClassifierModel classifier_from_json(const nlohmann::json& j);

}  // namespace clad
