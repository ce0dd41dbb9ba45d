#include "clad/classifier.hpp"

#include <algorithm>
#include <stdexcept>

#include "clad/losses.hpp"
#include "clad/rng.hpp"
#include "clad/serialize.hpp"

namespace clad {

using nlohmann::json;

namespace {

Network build_classifier_net(const ClassifierTrainConfig& cfg,
                             const std::vector<std::size_t>& sample_shape, std::size_t num_classes,
                             Rng& rng) {
    Network net;
    std::size_t d = shape_numel(sample_shape);
    if (cfg.arch == ArchPreset::mlp) {
        net.add(std::make_unique<DenseLayer>(d, cfg.mlp_width, rng));
        net.add(std::make_unique<ReluLayer>());
        net.add(std::make_unique<DenseLayer>(cfg.mlp_width, cfg.mlp_width2, rng));
        net.add(std::make_unique<ReluLayer>());
        net.add(std::make_unique<DenseLayer>(cfg.mlp_width2, num_classes, rng));
    } else {
        std::size_t h, w;
        if (sample_shape.size() == 2) {
            h = sample_shape[0];
            w = sample_shape[1];
        } else if (sample_shape.size() == 3 && sample_shape[0] == 1) {
            h = sample_shape[1];
            w = sample_shape[2];
        } else {
            throw std::invalid_argument("conv preset needs (H, W) or (1, H, W) samples, got " +
                                        shape_str(sample_shape));
        }
        if (h < 7 || w < 7) throw std::invalid_argument("conv preset needs input of at least 7x7");
        std::size_t h1 = (h - 3) / 2 + 1, w1 = (w - 3) / 2 + 1;
        std::size_t h2 = (h1 - 3) / 2 + 1, w2 = (w1 - 3) / 2 + 1;
        net.add(std::make_unique<Conv2dLayer>(1, 8, 3, 3, 2, rng));
        net.add(std::make_unique<ReluLayer>());
        net.add(std::make_unique<Conv2dLayer>(8, 16, 3, 3, 2, rng));
        net.add(std::make_unique<ReluLayer>());
        net.add(std::make_unique<DenseLayer>(16 * h2 * w2, 64, rng));
        net.add(std::make_unique<ReluLayer>());
        net.add(std::make_unique<DenseLayer>(64, num_classes, rng));
    }
    return net;
}

}  // namespace

ClassifierModel train_classifier(const std::vector<Tensor>& x_tr, const PseudoLabels& labels,
                                 const ClassifierTrainConfig& cfg, const InputScaler& scaler) {
    if (x_tr.empty()) throw std::invalid_argument("train_classifier: empty training set");
    if (x_tr.size() != labels.labels.size()) {
        throw std::invalid_argument("train_classifier: " + std::to_string(x_tr.size()) + " samples but " +
                                    std::to_string(labels.labels.size()) + " labels");
    }
    if (cfg.epochs == 0 || cfg.batch_size == 0) {
        throw std::invalid_argument("train_classifier: epochs and batch size must be positive");
    }
    std::size_t num_classes = labels.label_count;
    if (num_classes < 2) {
        throw std::invalid_argument("train_classifier: need at least 2 classes");
    }
    std::size_t distinct = 0;
    for (std::size_t c = 0; c < labels.cluster_counts.size(); ++c) {
        if (labels.cluster_counts[c] > 0) ++distinct;
    }
    if (distinct < 2) {
        throw std::invalid_argument(
            "train_classifier: pseudo-labels collapse to a single class; raise the cluster count K "
            "or inspect the clustering stage");
    }

    ClassifierModel model;
    model.num_classes = num_classes;
    model.input_shape = x_tr.front().shape;
    model.scaler = scaler;

    Rng init_rng(derive_seed(cfg.seed, "cls-init"));
    model.net = build_classifier_net(cfg, model.input_shape, num_classes, init_rng);
    model.net.set_mode(Mode::train);

    std::vector<Tensor> scaled;
    scaled.reserve(x_tr.size());
    for (const Tensor& x : x_tr) {
        if (x.shape != model.input_shape) {
            throw std::invalid_argument("train_classifier: heterogeneous sample shapes");
        }
        scaled.push_back(scaler.apply(x));
    }

    std::vector<Tensor*> params = model.net.parameters();
    Optimizer opt({.algo = cfg.optimizer, .learning_rate = cfg.learning_rate});
    Rng shuffle_rng(derive_seed(cfg.seed, "cls-shuffle"));
    Rng dropout_rng(derive_seed(cfg.seed, "cls-dropout"));

    std::size_t n = scaled.size();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<std::size_t> order = shuffle_rng.permutation(n);
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t end = std::min(start + cfg.batch_size, n);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
            Tensor batch = stack_batch(scaled, idx);
            std::vector<int> y;
            y.reserve(idx.size());
            for (std::size_t i : idx) y.push_back(labels.labels[i] - 1);  // to 0-based classes

            ForwardResult fr = forward(model.net, batch, &dropout_rng);
            for (std::size_t r = 0; r < idx.size(); ++r) {
                std::size_t best = 0;
                for (std::size_t j = 1; j < num_classes; ++j) {
                    if (fr.output.at2(r, j) > fr.output.at2(r, best)) best = j;
                }
                if (static_cast<int>(best) == y[r]) ++correct;
            }

            BackwardResult br = backward(model.net, fr.trace, cross_entropy_grad(fr.output, y));
            opt.step(params, br.param_grads);
        }
        model.accuracy_history.push_back(static_cast<double>(correct) / static_cast<double>(n));
        for (Tensor* p : params) p->check_finite("classifier parameters");
    }

    model.net.set_mode(Mode::eval);
    return model;
}

Tensor predict_logits(const ClassifierModel& model, const Tensor& x) {
    if (x.shape != model.input_shape) {
        throw std::invalid_argument("predict_logits: sample shape " + x.shape_str() +
                                    " does not match model input " + shape_str(model.input_shape));
    }
    Tensor out = eval_forward_value(model.net, stack_batch({model.scaler.apply(x)}));
    return Tensor({model.num_classes}, std::move(out.data));
}

Tensor predict_logits_batch(const ClassifierModel& model, const Tensor& batch) {
    std::vector<std::size_t> expect = model.input_shape;
    expect.insert(expect.begin(), batch.dim(0));
    if (batch.shape != expect) {
        throw std::invalid_argument("predict_logits_batch: batch shape " + batch.shape_str() +
                                    " does not match model input " + shape_str(model.input_shape));
    }
    Tensor scaled = model.scaler.apply(batch);
    return eval_forward_value(model.net, scaled);
}

json classifier_to_json(const ClassifierModel& model) {
    return json{{"format", "clad-model"},
                {"kind", "classifier"},
                {"version", 1},
                {"num_classes", model.num_classes},
                {"input_shape", model.input_shape},
                {"scaler", {{"lo", model.scaler.lo}, {"hi", model.scaler.hi}}},
                {"accuracy_history", model.accuracy_history},
                {"net", network_to_json(model.net)}};
}

ClassifierModel classifier_from_json(const json& j) {
    if (j.value("kind", "") != "classifier") throw std::runtime_error("not a classifier container");
    ClassifierModel m;
    m.num_classes = j.at("num_classes").get<std::size_t>();
    m.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    m.scaler.lo = j.at("scaler").at("lo").get<double>();
    m.scaler.hi = j.at("scaler").at("hi").get<double>();
    m.accuracy_history = j.at("accuracy_history").get<std::vector<double>>();
    m.net = network_from_json(j.at("net"));
    m.net.set_mode(Mode::eval);
    return m;
}

}  // namespace clad
