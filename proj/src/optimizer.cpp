#include "clad/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace clad {

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
    if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("optimizer: learning rate must be >= 0");
    if (cfg.algo == OptAlgo::sgd_momentum && (cfg.momentum < 0.0 || cfg.momentum >= 1.0)) {
        throw std::invalid_argument("optimizer: momentum must be in [0, 1)");
    }
}

void Optimizer::reset() {
    slot1_.clear();
    slot2_.clear();
    t_ = 0;
}

void Optimizer::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("optimizer: " + std::to_string(params.size()) + " parameters but " +
                                    std::to_string(grads.size()) + " gradients");
    }
    if (slot1_.empty()) {
        for (const Tensor* p : params) slot1_.emplace_back(p->shape);
        if (cfg_.algo == OptAlgo::adam) {
            for (const Tensor* p : params) slot2_.emplace_back(p->shape);
        }
    }
    if (slot1_.size() != params.size()) {
        throw std::invalid_argument("optimizer: parameter count changed across steps");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->shape != slot1_[i].shape || params[i]->shape != grads[i].shape) {
            throw std::invalid_argument("optimizer: shape mismatch at parameter " + std::to_string(i) +
                                        " (param " + params[i]->shape_str() + ", grad " +
                                        grads[i].shape_str() + ", state " + slot1_[i].shape_str() + ")");
        }
    }
    ++t_;
    if (cfg_.algo == OptAlgo::sgd_momentum) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& v = slot1_[i];
            Tensor& p = *params[i];
            const Tensor& g = grads[i];
            for (std::size_t k = 0; k < p.numel(); ++k) {
                v[k] = cfg_.momentum * v[k] + g[k];
                p[k] -= cfg_.learning_rate * v[k];
            }
        }
    } else {
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& m = slot1_[i];
            Tensor& v = slot2_[i];
            Tensor& p = *params[i];
            const Tensor& g = grads[i];
            for (std::size_t k = 0; k < p.numel(); ++k) {
                m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
                v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
                double mhat = m[k] / bc1;
                double vhat = v[k] / bc2;
                p[k] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }
}

OptAlgo opt_algo_from_name(const std::string& name) {
    if (name == "sgd_momentum" || name == "sgd") return OptAlgo::sgd_momentum;
    if (name == "adam") return OptAlgo::adam;
    throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string opt_algo_name(OptAlgo a) {
    return a == OptAlgo::sgd_momentum ? "sgd_momentum" : "adam";
}

}  // namespace clad
