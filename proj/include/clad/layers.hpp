#pragma once

#include <memory>
#include <string>
#include <vector>

#include "clad/rng.hpp"
#include "clad/tensor.hpp"

namespace clad {

enum class LayerKind { dense, conv2d, relu, sigmoid, dropout };

std::string layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

/// Per-layer state captured during forward, sufficient for backward.
/// `input` is the layer input; `aux` holds the dropout mask or the sigmoid output.
struct LayerCache {
    Tensor input;
    Tensor aux;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual LayerKind kind() const = 0;
    virtual std::string describe() const = 0;
    /// Computes the layer output for a batch (first dim = N) and fills `cache`.
    /// `rng` is consumed only by dropout in train mode.
    virtual Tensor forward(const Tensor& x, LayerCache& cache, bool train, Rng* rng) const = 0;
    /// Returns the gradient w.r.t. the layer input and appends gradients for
    /// each parameter tensor (in params() order) to `param_grads`.
    virtual Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                            std::vector<Tensor>& param_grads) const = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<const Tensor*> params() const { return {}; }
    virtual std::unique_ptr<Layer> clone() const = 0;
};

class DenseLayer final : public Layer {
public:
    /// Weight shape (out_width, in_width), bias length out_width.
    /// Initialized uniform in +-sqrt(6/(fan_in+fan_out)), bias zero.
    DenseLayer(std::size_t in_width, std::size_t out_width, Rng& rng);
    DenseLayer(Tensor weight, Tensor bias);

    LayerKind kind() const override { return LayerKind::dense; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, LayerCache& cache, bool train, Rng* rng) const override;
    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>& param_grads) const override;
    std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
    std::vector<const Tensor*> params() const override { return {&weight_, &bias_}; }
    std::unique_ptr<Layer> clone() const override;

    std::size_t in_width() const { return weight_.dim(1); }
    std::size_t out_width() const { return weight_.dim(0); }
    const Tensor& weight() const { return weight_; }
    const Tensor& bias() const { return bias_; }

private:
    Tensor weight_;
    Tensor bias_;
};

class Conv2dLayer final : public Layer {
public:
    /// Valid padding, no dilation. Weight shape (out_c, in_c, kh, kw).
    /// Accepts input (N, C, H, W), or (N, H, W) when in_channels == 1.
    Conv2dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_h,
                std::size_t kernel_w, std::size_t stride, Rng& rng);
    Conv2dLayer(std::size_t stride, Tensor weight, Tensor bias);

    LayerKind kind() const override { return LayerKind::conv2d; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, LayerCache& cache, bool train, Rng* rng) const override;
    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>& param_grads) const override;
    std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
    std::vector<const Tensor*> params() const override { return {&weight_, &bias_}; }
    std::unique_ptr<Layer> clone() const override;

    std::size_t in_channels() const { return weight_.dim(1); }
    std::size_t out_channels() const { return weight_.dim(0); }
    std::size_t kernel_h() const { return weight_.dim(2); }
    std::size_t kernel_w() const { return weight_.dim(3); }
    std::size_t stride() const { return stride_; }

private:
    std::size_t stride_;
    Tensor weight_;
    Tensor bias_;
};

class ReluLayer final : public Layer {
public:
    LayerKind kind() const override { return LayerKind::relu; }
    std::string describe() const override { return "relu"; }
    Tensor forward(const Tensor& x, LayerCache& cache, bool train, Rng* rng) const override;
    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>& param_grads) const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ReluLayer>(); }
};

class SigmoidLayer final : public Layer {
public:
    LayerKind kind() const override { return LayerKind::sigmoid; }
    std::string describe() const override { return "sigmoid"; }
    Tensor forward(const Tensor& x, LayerCache& cache, bool train, Rng* rng) const override;
    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>& param_grads) const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<SigmoidLayer>(); }
};

/// Inverted dropout: train-time outputs are scaled by 1/keep_prob so eval is the identity.
class DropoutLayer final : public Layer {
public:
    explicit DropoutLayer(double keep_prob);

    LayerKind kind() const override { return LayerKind::dropout; }
    std::string describe() const override;
    Tensor forward(const Tensor& x, LayerCache& cache, bool train, Rng* rng) const override;
    Tensor backward(const Tensor& grad_out, const LayerCache& cache,
                    std::vector<Tensor>& param_grads) const override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<DropoutLayer>(keep_prob_); }

    double keep_prob() const { return keep_prob_; }

private:
    double keep_prob_;
};

}  // namespace clad
