#pragma once

#include <vector>

#include "clad/tensor.hpp"

namespace clad {

/// Temperature-scaled softmax over the last dimension, computed with
/// max-subtraction. Preserves the argmax for every T > 0. Throws on T <= 0.
Tensor softmax_with_temperature(const Tensor& logits, double temperature);

/// Mean squared error over all elements (batch and feature dims folded together).
/// Requires equal element counts and, for batched tensors, equal batch sizes.
double mse_value(const Tensor& pred, const Tensor& target);
Tensor mse_grad(const Tensor& pred, const Tensor& target);

/// Mean negative log-likelihood of integer labels under softmax(logits).
/// logits shape (N, L); labels are 0-based class indices. Probabilities are
/// clamped at 1e-12 before the log.
double cross_entropy_value(const Tensor& logits, const std::vector<int>& labels);
Tensor cross_entropy_grad(const Tensor& logits, const std::vector<int>& labels);

/// Loss attached to a network output, for training loops and grad_check.
/// A loss may own trainable tensors of its own (the KL clustering loss trains
/// the centroids); those are exposed through params()/param_grads().
class LossFn {
public:
    virtual ~LossFn() = default;
    virtual std::string name() const = 0;
    virtual double value(const Tensor& output) const = 0;
    virtual Tensor output_grad(const Tensor& output) const = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor> param_grads(const Tensor&) const { return {}; }
};

class MseLoss final : public LossFn {
public:
    explicit MseLoss(Tensor target) : target_(std::move(target)) {}
    std::string name() const override { return "mse"; }
    double value(const Tensor& output) const override { return mse_value(output, target_); }
    Tensor output_grad(const Tensor& output) const override { return mse_grad(output, target_); }

private:
    Tensor target_;
};

class CrossEntropyLoss final : public LossFn {
public:
    explicit CrossEntropyLoss(std::vector<int> labels) : labels_(std::move(labels)) {}
    std::string name() const override { return "cross_entropy"; }
    double value(const Tensor& output) const override { return cross_entropy_value(output, labels_); }
    Tensor output_grad(const Tensor& output) const override { return cross_entropy_grad(output, labels_); }

private:
    std::vector<int> labels_;
};

/// Loss that is identically zero; degenerate case for verification harnesses.
class ZeroLoss final : public LossFn {
public:
    std::string name() const override { return "zero"; }
    double value(const Tensor&) const override { return 0.0; }
    Tensor output_grad(const Tensor& output) const override { return Tensor(output.shape); }
};

}  // namespace clad
