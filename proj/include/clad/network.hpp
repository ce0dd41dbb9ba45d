#pragma once

#include <memory>
#include <vector>

#include "clad/layers.hpp"

namespace clad {

enum class Mode { train, eval };

/// Ordered layer stack with value semantics (copies deep-clone layers).
/// Eval-mode networks are immutable during forward and safe for concurrent reads.
class Network {
public:
    Network() = default;
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    void add(std::unique_ptr<Layer> layer);
    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }

    bool has_dropout() const;

    /// All parameter tensors in layer order (dense/conv weights then biases).
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::size_t parameter_count() const;

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    Mode mode_ = Mode::eval;
};

/// Per-layer inputs captured by forward; consumed by backward.
struct ActivationTrace {
    std::vector<LayerCache> caches;
    std::vector<std::size_t> input_shape;
    std::vector<std::size_t> output_shape;
    std::size_t layer_count = 0;
};

struct ForwardResult {
    Tensor output;
    ActivationTrace trace;
};

/// Runs the batch through the network. Throws a composition error naming the
/// offending layer index on shape mismatch. `rng` is required only when the
/// network is in train mode and contains dropout.
ForwardResult forward(const Network& net, const Tensor& batch, Rng* rng = nullptr);

/// Forward without keeping the trace.
Tensor forward_value(const Network& net, const Tensor& batch, Rng* rng = nullptr);

/// Forward that ignores the network's mode flag and always runs eval semantics
/// (dropout as identity); deterministic regardless of rng state.
ForwardResult eval_forward(const Network& net, const Tensor& batch);
Tensor eval_forward_value(const Network& net, const Tensor& batch);

struct BackwardResult {
    /// Aligned with Network::parameters() order.
    std::vector<Tensor> param_grads;
    Tensor input_grad;
};

/// Backpropagates `output_grad` through the trace produced by a matching forward.
BackwardResult backward(const Network& net, const ActivationTrace& trace, const Tensor& output_grad);

}  // namespace clad
