#include "clad/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "clad/losses.hpp"

namespace clad {

using nlohmann::json;

void DetectorConfig::validate() const {
    if (!(temperature > 0.0)) throw std::invalid_argument("detector: temperature must be positive");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("detector: epsilon must be non-negative");
    if (!(clamp_lo < clamp_hi)) throw std::invalid_argument("detector: empty clamp range");
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("detector: delta must be in [0, 1]");
}

Tensor perturb_input(const ClassifierModel& model, const Tensor& x, const DetectorConfig& cfg) {
    cfg.validate();
    if (x.shape != model.input_shape) {
        throw std::invalid_argument("perturb_input: sample shape " + x.shape_str() +
                                    " does not match model input " + shape_str(model.input_shape));
    }
    if (cfg.epsilon == 0.0) return x;

    Tensor batch = stack_batch({model.scaler.apply(x)});
    ForwardResult fr = eval_forward(model.net, batch);
    std::size_t l = model.num_classes;
    Tensor probs = softmax_with_temperature(fr.output, cfg.temperature);
    std::size_t yhat = 0;
    for (std::size_t j = 1; j < l; ++j) {
        if (probs[j] > probs[yhat]) yhat = j;
    }

    // d log p_yhat / d logit_j = (1[j == yhat] - p_j) / T
    Tensor out_grad(fr.output.shape);
    for (std::size_t j = 0; j < l; ++j) {
        out_grad[j] = ((j == yhat ? 1.0 : 0.0) - probs[j]) / cfg.temperature;
    }
    BackwardResult br = backward(model.net, fr.trace, out_grad);

    // the scaler is affine with positive gain, so the sign of the gradient
    // w.r.t. the raw input equals its sign in scaled space
    Tensor perturbed = x;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        double g = br.input_grad[i];
        double step = g > 0.0 ? cfg.epsilon : (g < 0.0 ? -cfg.epsilon : 0.0);
        perturbed[i] = std::clamp(x[i] + step, cfg.clamp_lo, cfg.clamp_hi);
    }
    return perturbed;
}

AnomalyScore score(const ClassifierModel& model, const Tensor& x, const DetectorConfig& cfg) {
    cfg.validate();
    Tensor perturbed = perturb_input(model, x, cfg);
    Tensor logits = predict_logits(model, perturbed);
    Tensor probs = softmax_with_temperature(logits, cfg.temperature);
    AnomalyScore out;
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.numel(); ++j) {
        if (probs[j] > probs[best]) best = j;
    }
    out.s = probs[best];
    out.predicted_class = static_cast<int>(best) + 1;
    out.perturbed = cfg.epsilon > 0.0;
    return out;
}

int detect(const AnomalyScore& score, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("detect: delta must be in [0, 1]");
    return score.s > delta ? 0 : 1;
}

json detector_config_to_json(const DetectorConfig& cfg) {
    return json{{"temperature", cfg.temperature},
                {"epsilon", cfg.epsilon},
                {"delta", cfg.delta},
                {"clamp_lo", cfg.clamp_lo},
                {"clamp_hi", cfg.clamp_hi}};
}

DetectorConfig detector_config_from_json(const json& j) {
    DetectorConfig cfg;
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.clamp_lo = j.value("clamp_lo", cfg.clamp_lo);
    cfg.clamp_hi = j.value("clamp_hi", cfg.clamp_hi);
    return cfg;
}

}  // namespace clad
