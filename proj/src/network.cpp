#include "clad/network.hpp"

#include <stdexcept>

namespace clad {

Network::Network(const Network& other) : mode_(other.mode_) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
    if (this == &other) return *this;
    layers_.clear();
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
    mode_ = other.mode_;
    return *this;
}

void Network::add(std::unique_ptr<Layer> layer) {
    if (!layer) throw std::invalid_argument("network: null layer");
    layers_.push_back(std::move(layer));
}

bool Network::has_dropout() const {
    for (const auto& l : layers_) {
        if (l->kind() == LayerKind::dropout) return true;
    }
    return false;
}

std::vector<Tensor*> Network::parameters() {
    std::vector<Tensor*> out;
    for (auto& l : layers_) {
        for (Tensor* p : l->params()) out.push_back(p);
    }
    return out;
}

std::vector<const Tensor*> Network::parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_) {
        for (const Tensor* p : l->params()) out.push_back(p);
    }
    return out;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* p : parameters()) n += p->numel();
    return n;
}

static ForwardResult run_forward(const Network& net, const Tensor& batch, bool train, Rng* rng) {
    if (batch.rank() < 2) {
        throw std::invalid_argument("forward: input must be a batch with leading sample dimension, got " +
                                    batch.shape_str());
    }
    ForwardResult r;
    r.trace.input_shape = batch.shape;
    r.trace.layer_count = net.layer_count();
    r.trace.caches.resize(net.layer_count());
    Tensor x = batch;
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        try {
            x = net.layer(i).forward(x, r.trace.caches[i], train, rng);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("forward: layer " + std::to_string(i) + ": " + e.what());
        }
    }
    r.trace.output_shape = x.shape;
    r.output = std::move(x);
    return r;
}

ForwardResult forward(const Network& net, const Tensor& batch, Rng* rng) {
    return run_forward(net, batch, net.mode() == Mode::train, rng);
}

Tensor forward_value(const Network& net, const Tensor& batch, Rng* rng) {
    return forward(net, batch, rng).output;
}

ForwardResult eval_forward(const Network& net, const Tensor& batch) {
    return run_forward(net, batch, false, nullptr);
}

Tensor eval_forward_value(const Network& net, const Tensor& batch) {
    return eval_forward(net, batch).output;
}

BackwardResult backward(const Network& net, const ActivationTrace& trace, const Tensor& output_grad) {
    if (trace.layer_count != net.layer_count() || trace.caches.size() != net.layer_count()) {
        throw std::invalid_argument("backward: trace does not match network (stale or foreign trace)");
    }
    if (output_grad.shape != trace.output_shape) {
        throw std::invalid_argument("backward: output gradient shape " + output_grad.shape_str() +
                                    " does not match traced output " + shape_str(trace.output_shape));
    }
    std::vector<std::vector<Tensor>> per_layer(net.layer_count());
    Tensor g = output_grad;
    for (std::size_t i = net.layer_count(); i-- > 0;) {
        try {
            g = net.layer(i).backward(g, trace.caches[i], per_layer[i]);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("backward: layer " + std::to_string(i) + ": " + e.what());
        }
    }
    BackwardResult r;
    for (auto& grads : per_layer) {
        for (auto& t : grads) r.param_grads.push_back(std::move(t));
    }
    r.input_grad = std::move(g);
    return r;
}

}  // namespace clad
