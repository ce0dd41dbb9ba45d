#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "clad/network.hpp"
#include "clad/optimizer.hpp"
#include "clad/scaler.hpp"

namespace clad {

enum class ArchPreset { mlp, conv };

ArchPreset arch_preset_from_name(const std::string& name);
std::string arch_preset_name(ArchPreset a);

struct AutoencoderConfig {
    std::size_t hidden_dim = 100;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    OptAlgo optimizer = OptAlgo::adam;
    double learning_rate = 0.01;
    double dropout_keep = 0.9;   // applied after each encoder hidden activation
    ArchPreset arch = ArchPreset::mlp;
    std::size_t mlp_width = 256;
    bool scale_inputs = true;
    std::uint64_t seed = 1;
};

struct AutoencoderModel {
    Network encoder;
    Network decoder;
    std::size_t hidden_dim = 0;
    std::vector<std::size_t> input_shape;  // per-sample shape seen at training
    InputScaler scaler;
    std::vector<double> loss_history;      // per-epoch mean of per-sample MSE
};

/// Trains encoder+decoder with reconstruction MSE on X_tr. Inputs are scaled
/// to [0,1] by a scaler fitted on X_tr (recorded in the model). Shuffling and
/// initialization are seeded.
AutoencoderModel train_autoencoder(const std::vector<Tensor>& x_tr, const AutoencoderConfig& cfg);

/// Latent feature of a single sample; deterministic (encoder runs in eval mode).
Tensor encode(const AutoencoderModel& model, const Tensor& x);

/// Latent features for many samples, stacked as (N, hidden_dim).
Tensor encode_batch(const AutoencoderModel& model, const std::vector<Tensor>& xs);

/// Reconstruction MSE of one sample under the trained model (eval mode).
double reconstruction_error(const AutoencoderModel& model, const Tensor& x);

nlohmann::json autoencoder_to_json(const AutoencoderModel& model);
AutoencoderModel autoencoder_from_json(const nlohmann::json& j);

}  // namespace clad
