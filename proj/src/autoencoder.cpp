#include "clad/autoencoder.hpp"

#include <algorithm>
#include <stdexcept>

#include "clad/losses.hpp"
#include "clad/rng.hpp"
#include "clad/serialize.hpp"

namespace clad {

using nlohmann::json;

ArchPreset arch_preset_from_name(const std::string& name) {
    if (name == "mlp") return ArchPreset::mlp;
    if (name == "conv") return ArchPreset::conv;
    throw std::invalid_argument("unknown architecture preset '" + name + "'");
}

std::string arch_preset_name(ArchPreset a) { return a == ArchPreset::mlp ? "mlp" : "conv"; }

InputScaler InputScaler::fit(const std::vector<Tensor>& samples) {
    if (samples.empty()) throw std::invalid_argument("scaler: empty sample list");
    double lo = samples[0].data[0], hi = samples[0].data[0];
    for (const Tensor& s : samples) {
        for (double v : s.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return {lo, hi};
}

Tensor InputScaler::apply(const Tensor& x) const {
    Tensor y = x;
    double g = gain();
    for (double& v : y.data) v = (v - lo) * g;
    return y;
}

namespace {

struct ConvDims {
    std::size_t h1, w1, h2, w2;  // spatial extents after each stride-2 conv
};

ConvDims conv_dims(std::size_t h, std::size_t w) {
    if (h < 7 || w < 7) {
        throw std::invalid_argument("conv preset needs input of at least 7x7, got " +
                                    std::to_string(h) + "x" + std::to_string(w));
    }
    ConvDims d;
    d.h1 = (h - 3) / 2 + 1;
    d.w1 = (w - 3) / 2 + 1;
    d.h2 = (d.h1 - 3) / 2 + 1;
    d.w2 = (d.w1 - 3) / 2 + 1;
    return d;
}

void spatial_dims(const std::vector<std::size_t>& sample_shape, std::size_t& h, std::size_t& w) {
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
}

Network build_encoder(const AutoencoderConfig& cfg, const std::vector<std::size_t>& sample_shape,
                      Rng& rng) {
    Network enc;
    std::size_t d = shape_numel(sample_shape);
    if (cfg.arch == ArchPreset::mlp) {
        enc.add(std::make_unique<DenseLayer>(d, cfg.mlp_width, rng));
        enc.add(std::make_unique<ReluLayer>());
        if (cfg.dropout_keep < 1.0) enc.add(std::make_unique<DropoutLayer>(cfg.dropout_keep));
        enc.add(std::make_unique<DenseLayer>(cfg.mlp_width, cfg.hidden_dim, rng));
    } else {
        std::size_t h, w;
        spatial_dims(sample_shape, h, w);
        ConvDims cd = conv_dims(h, w);
        enc.add(std::make_unique<Conv2dLayer>(1, 8, 3, 3, 2, rng));
        enc.add(std::make_unique<ReluLayer>());
        if (cfg.dropout_keep < 1.0) enc.add(std::make_unique<DropoutLayer>(cfg.dropout_keep));
        enc.add(std::make_unique<Conv2dLayer>(8, 16, 3, 3, 2, rng));
        enc.add(std::make_unique<ReluLayer>());
        if (cfg.dropout_keep < 1.0) enc.add(std::make_unique<DropoutLayer>(cfg.dropout_keep));
        enc.add(std::make_unique<DenseLayer>(16 * cd.h2 * cd.w2, cfg.hidden_dim, rng));
    }
    return enc;
}

Network build_decoder(const AutoencoderConfig& cfg, std::size_t output_numel, Rng& rng) {
    // mirrored MLP decoder with sigmoid output for [0,1]-scaled data
    Network dec;
    dec.add(std::make_unique<DenseLayer>(cfg.hidden_dim, cfg.mlp_width, rng));
    dec.add(std::make_unique<ReluLayer>());
    dec.add(std::make_unique<DenseLayer>(cfg.mlp_width, output_numel, rng));
    dec.add(std::make_unique<SigmoidLayer>());
    return dec;
}

}  // namespace

AutoencoderModel train_autoencoder(const std::vector<Tensor>& x_tr, const AutoencoderConfig& cfg) {
    if (x_tr.empty()) throw std::invalid_argument("train_autoencoder: empty training set");
    if (cfg.hidden_dim == 0) throw std::invalid_argument("train_autoencoder: hidden_dim must be positive");
    if (cfg.batch_size == 0) throw std::invalid_argument("train_autoencoder: batch size must be positive");
    const auto& shape0 = x_tr.front().shape;
    for (std::size_t i = 1; i < x_tr.size(); ++i) {
        if (x_tr[i].shape != shape0) {
            throw std::invalid_argument("train_autoencoder: sample " + std::to_string(i) + " has shape " +
                                        x_tr[i].shape_str() + ", expected " + shape_str(shape0));
        }
    }

    AutoencoderModel model;
    model.hidden_dim = cfg.hidden_dim;
    model.input_shape = shape0;
    model.scaler = cfg.scale_inputs ? InputScaler::fit(x_tr) : InputScaler::identity();

    Rng init_rng(derive_seed(cfg.seed, "ae-init"));
    model.encoder = build_encoder(cfg, shape0, init_rng);
    model.decoder = build_decoder(cfg, shape_numel(shape0), init_rng);
    model.encoder.set_mode(Mode::train);
    model.decoder.set_mode(Mode::train);

    std::vector<Tensor> scaled;
    scaled.reserve(x_tr.size());
    for (const Tensor& x : x_tr) scaled.push_back(model.scaler.apply(x));

    std::vector<Tensor*> params = model.encoder.parameters();
    {
        auto dec_params = model.decoder.parameters();
        params.insert(params.end(), dec_params.begin(), dec_params.end());
    }
    std::size_t enc_param_count = model.encoder.parameters().size();

    Optimizer opt({.algo = cfg.optimizer, .learning_rate = cfg.learning_rate});
    Rng shuffle_rng(derive_seed(cfg.seed, "ae-shuffle"));
    Rng dropout_rng(derive_seed(cfg.seed, "ae-dropout"));

    std::size_t n = scaled.size();
    std::size_t sample_numel = shape_numel(shape0);
    std::vector<double> sample_loss(n);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<std::size_t> order = shuffle_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t end = std::min(start + cfg.batch_size, n);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
            Tensor batch = stack_batch(scaled, idx);

            ForwardResult enc = forward(model.encoder, batch, &dropout_rng);
            ForwardResult dec = forward(model.decoder, enc.output, &dropout_rng);

            for (std::size_t r = 0; r < idx.size(); ++r) {
                double acc = 0.0;
                for (std::size_t t = 0; t < sample_numel; ++t) {
                    double diff = dec.output[r * sample_numel + t] - batch[r * sample_numel + t];
                    acc += diff * diff;
                }
                sample_loss[idx[r]] = acc / static_cast<double>(sample_numel);
            }

            BackwardResult dec_back = backward(model.decoder, dec.trace, mse_grad(dec.output, batch));
            BackwardResult enc_back = backward(model.encoder, enc.trace, dec_back.input_grad);

            std::vector<Tensor> grads = std::move(enc_back.param_grads);
            for (auto& g : dec_back.param_grads) grads.push_back(std::move(g));
            if (grads.size() != params.size()) {
                throw std::logic_error("train_autoencoder: gradient bookkeeping mismatch");
            }
            opt.step(params, grads);
        }
        // summed in sample order so the reported mean is independent of batching
        double loss_acc = 0.0;
        for (double l : sample_loss) loss_acc += l;
        model.loss_history.push_back(loss_acc / static_cast<double>(n));
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i]->check_finite(i < enc_param_count ? "autoencoder encoder parameters"
                                                        : "autoencoder decoder parameters");
        }
    }

    model.encoder.set_mode(Mode::eval);
    model.decoder.set_mode(Mode::eval);
    return model;
}

Tensor encode(const AutoencoderModel& model, const Tensor& x) {
    if (x.shape != model.input_shape) {
        throw std::invalid_argument("encode: sample shape " + x.shape_str() + " does not match model input " +
                                    shape_str(model.input_shape));
    }
    Tensor batch = stack_batch({model.scaler.apply(x)});
    Tensor out = eval_forward_value(model.encoder, batch);
    return Tensor({model.hidden_dim}, std::move(out.data));
}

Tensor encode_batch(const AutoencoderModel& model, const std::vector<Tensor>& xs) {
    if (xs.empty()) throw std::invalid_argument("encode_batch: empty sample list");
    std::vector<Tensor> scaled;
    scaled.reserve(xs.size());
    for (const Tensor& x : xs) {
        if (x.shape != model.input_shape) {
            throw std::invalid_argument("encode_batch: sample shape " + x.shape_str() +
                                        " does not match model input " + shape_str(model.input_shape));
        }
        scaled.push_back(model.scaler.apply(x));
    }
    Tensor out = eval_forward_value(model.encoder, stack_batch(scaled));
    return Tensor({xs.size(), model.hidden_dim}, std::move(out.data));
}

double reconstruction_error(const AutoencoderModel& model, const Tensor& x) {
    Tensor scaled = model.scaler.apply(x);
    Tensor batch = stack_batch({scaled});
    Tensor z = eval_forward_value(model.encoder, batch);
    Tensor rec = eval_forward_value(model.decoder, z);
    return mse_value(rec, batch);
}

json autoencoder_to_json(const AutoencoderModel& model) {
    return json{{"format", "clad-model"},
                {"kind", "autoencoder"},
                {"version", 1},
                {"hidden_dim", model.hidden_dim},
                {"input_shape", model.input_shape},
                {"scaler", {{"lo", model.scaler.lo}, {"hi", model.scaler.hi}}},
                {"loss_history", model.loss_history},
                {"encoder", network_to_json(model.encoder)},
                {"decoder", network_to_json(model.decoder)}};
}

AutoencoderModel autoencoder_from_json(const json& j) {
    if (j.value("kind", "") != "autoencoder") {
        throw std::runtime_error("not an autoencoder container");
    }
    AutoencoderModel m;
    m.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    m.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    m.scaler.lo = j.at("scaler").at("lo").get<double>();
    m.scaler.hi = j.at("scaler").at("hi").get<double>();
    m.loss_history = j.at("loss_history").get<std::vector<double>>();
    m.encoder = network_from_json(j.at("encoder"));
    m.decoder = network_from_json(j.at("decoder"));
    m.encoder.set_mode(Mode::eval);
    m.decoder.set_mode(Mode::eval);
    return m;
}

}  // namespace clad
