#pragma once

#include <cstdint>
#include <vector>

#include "clad/tensor.hpp"

namespace clad {

enum class OptAlgo { sgd_momentum, adam };

struct OptimizerConfig {
    OptAlgo algo = OptAlgo::sgd_momentum;
    double learning_rate = 0.01;
    double momentum = 0.9;    // sgd_momentum
    double beta1 = 0.9;       // adam
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Holds per-parameter accumulators. The first step() call binds the state to
/// the parameter shapes; later calls check shapes match exactly.
///
/// sgd_momentum:  v <- m*v + g;  theta <- theta - lr*v
/// adam:          bias-corrected first/second moment update
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg);

    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

    const OptimizerConfig& config() const { return cfg_; }
    std::uint64_t steps_taken() const { return t_; }
    void reset();

private:
    OptimizerConfig cfg_;
    std::vector<Tensor> slot1_;  // momentum / first moment
    std::vector<Tensor> slot2_;  // second moment (adam)
    std::uint64_t t_ = 0;
};

OptAlgo opt_algo_from_name(const std::string& name);
std::string opt_algo_name(OptAlgo a);

}  // namespace clad
