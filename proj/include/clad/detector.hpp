#pragma once

#include "json.hpp"

#include "clad/classifier.hpp"

namespace clad {

struct DetectorConfig {
    double temperature = 1000.0;  // T
    double epsilon = 0.0014;      // perturbation magnitude, input-scale units
    double delta = 0.5;           // decision threshold on the confidence score
    double clamp_lo = 0.0;        // valid input value range for the perturbed sample
    double clamp_hi = 1.0;

    void validate() const;
};

struct AnomalyScore {
    double s = 0.0;           // max temperature-scaled softmax probability of the perturbed input
    int predicted_class = 0;  // 1-based pseudo-class achieving s
    bool perturbed = false;
};

/// Signed-gradient step that increases the predicted class's log-probability
/// at temperature T: x~ = clamp(x + eps * sign(grad_x log p_yhat(x;T)), lo, hi).
/// eps = 0 returns x unchanged.
Tensor perturb_input(const ClassifierModel& model, const Tensor& x, const DetectorConfig& cfg);

/// s(x;T) = max_i softmax(logits(x~)/T)_i.
AnomalyScore score(const ClassifierModel& model, const Tensor& x, const DetectorConfig& cfg);

/// 0 (normal) iff s > delta; s == delta counts as abnormal.
int detect(const AnomalyScore& score, double delta);

nlohmann::json detector_config_to_json(const DetectorConfig& cfg);
DetectorConfig detector_config_from_json(const nlohmann::json& j);

}  // namespace clad
