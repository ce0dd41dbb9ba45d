#include "clad/layers.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace clad {

std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::dropout: return "dropout";
    }
    throw std::logic_error("unknown layer kind");
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "dense") return LayerKind::dense;
    if (name == "conv2d") return LayerKind::conv2d;
    if (name == "relu") return LayerKind::relu;
    if (name == "sigmoid") return LayerKind::sigmoid;
    if (name == "dropout") return LayerKind::dropout;
    throw std::invalid_argument("unknown layer kind '" + name + "'");
}

static void init_uniform_glorot(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
}

// ---- dense ----

DenseLayer::DenseLayer(std::size_t in_width, std::size_t out_width, Rng& rng)
    : weight_({out_width, in_width}), bias_({out_width}) {
    if (in_width == 0 || out_width == 0) throw std::invalid_argument("dense: zero width");
    init_uniform_glorot(weight_, in_width, out_width, rng);
}

DenseLayer::DenseLayer(Tensor weight, Tensor bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
    if (weight_.rank() != 2) throw std::invalid_argument("dense: weight must be rank 2");
    if (bias_.rank() != 1 || bias_.dim(0) != weight_.dim(0)) {
        throw std::invalid_argument("dense: bias length must equal out width");
    }
}

std::string DenseLayer::describe() const {
    std::ostringstream os;
    os << "dense(" << in_width() << "->" << out_width() << ")";
    return os.str();
}

Tensor DenseLayer::forward(const Tensor& x, LayerCache& cache, bool, Rng*) const {
    if (x.rank() < 2) throw std::invalid_argument(describe() + ": input must be a batch (rank >= 2)");
    std::size_t n = x.dim(0);
    std::size_t d = x.numel() / n;
    if (d != in_width()) {
        throw std::invalid_argument(describe() + ": input " + x.shape_str() + " flattens to width " +
                                    std::to_string(d) + ", expected " + std::to_string(in_width()));
    }
    cache.input = x;
    std::size_t out = out_width();
    Tensor y({n, out});
    const double* xp = x.data.data();
    const double* wp = weight_.data.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = xp + i * d;
        double* yi = y.data.data() + i * out;
        for (std::size_t j = 0; j < out; ++j) {
            const double* wj = wp + j * d;
            double acc = bias_[j];
            for (std::size_t k = 0; k < d; ++k) acc += xi[k] * wj[k];
            yi[j] = acc;
        }
    }
    return y;
}

Tensor DenseLayer::backward(const Tensor& grad_out, const LayerCache& cache,
                            std::vector<Tensor>& param_grads) const {
    const Tensor& x = cache.input;
    std::size_t n = x.dim(0);
    std::size_t d = x.numel() / n;
    std::size_t out = out_width();
    if (grad_out.rank() != 2 || grad_out.dim(0) != n || grad_out.dim(1) != out) {
        throw std::invalid_argument(describe() + ": output gradient has shape " + grad_out.shape_str() +
                                    ", expected (" + std::to_string(n) + ", " + std::to_string(out) + ")");
    }
    Tensor dw({out, d});
    Tensor db({out});
    Tensor dx(x.shape);
    const double* xp = x.data.data();
    const double* gp = grad_out.data.data();
    const double* wp = weight_.data.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = xp + i * d;
        const double* gi = gp + i * out;
        double* dxi = dx.data.data() + i * d;
        for (std::size_t j = 0; j < out; ++j) {
            double g = gi[j];
            if (g == 0.0) continue;
            db[j] += g;
            const double* wj = wp + j * d;
            double* dwj = dw.data.data() + j * d;
            for (std::size_t k = 0; k < d; ++k) {
                dwj[k] += g * xi[k];
                dxi[k] += g * wj[k];
            }
        }
    }
    param_grads.push_back(std::move(dw));
    param_grads.push_back(std::move(db));
    return dx;
}

std::unique_ptr<Layer> DenseLayer::clone() const {
    return std::make_unique<DenseLayer>(weight_, bias_);
}

// ---- conv2d ----

Conv2dLayer::Conv2dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_h,
                         std::size_t kernel_w, std::size_t stride, Rng& rng)
    : stride_(stride), weight_({out_channels, in_channels, kernel_h, kernel_w}), bias_({out_channels}) {
    if (stride == 0) throw std::invalid_argument("conv2d: stride must be positive");
    std::size_t fan_in = in_channels * kernel_h * kernel_w;
    std::size_t fan_out = out_channels * kernel_h * kernel_w;
    init_uniform_glorot(weight_, fan_in, fan_out, rng);
}

Conv2dLayer::Conv2dLayer(std::size_t stride, Tensor weight, Tensor bias)
    : stride_(stride), weight_(std::move(weight)), bias_(std::move(bias)) {
    if (stride_ == 0) throw std::invalid_argument("conv2d: stride must be positive");
    if (weight_.rank() != 4) throw std::invalid_argument("conv2d: weight must be rank 4");
    if (bias_.rank() != 1 || bias_.dim(0) != weight_.dim(0)) {
        throw std::invalid_argument("conv2d: bias length must equal out channels");
    }
}

std::string Conv2dLayer::describe() const {
    std::ostringstream os;
    os << "conv2d(" << in_channels() << "->" << out_channels() << ", " << kernel_h() << "x"
       << kernel_w() << ", stride " << stride_ << ")";
    return os.str();
}

// Resolves (N,C,H,W) or (N,H,W) with C==1 into explicit dims.
static void conv_input_dims(const Tensor& x, std::size_t in_c, const std::string& what,
                            std::size_t& n, std::size_t& c, std::size_t& h, std::size_t& w) {
    if (x.rank() == 4) {
        n = x.dim(0); c = x.dim(1); h = x.dim(2); w = x.dim(3);
    } else if (x.rank() == 3 && in_c == 1) {
        n = x.dim(0); c = 1; h = x.dim(1); w = x.dim(2);
    } else {
        throw std::invalid_argument(what + ": input " + x.shape_str() +
                                    " is not (N, C, H, W) or single-channel (N, H, W)");
    }
    if (c != in_c) {
        throw std::invalid_argument(what + ": input has " + std::to_string(c) + " channels, expected " +
                                    std::to_string(in_c));
    }
}

Tensor Conv2dLayer::forward(const Tensor& x, LayerCache& cache, bool, Rng*) const {
    std::size_t n, c, h, w;
    conv_input_dims(x, in_channels(), describe(), n, c, h, w);
    std::size_t kh = kernel_h(), kw = kernel_w();
    if (h < kh || w < kw) {
        throw std::invalid_argument(describe() + ": input " + x.shape_str() +
                                    " smaller than kernel (valid padding)");
    }
    std::size_t oh = (h - kh) / stride_ + 1;
    std::size_t ow = (w - kw) / stride_ + 1;
    std::size_t oc = out_channels();
    cache.input = x;
    Tensor y({n, oc, oh, ow});
    for (std::size_t ni = 0; ni < n; ++ni) {
        const double* xn = x.data.data() + ni * c * h * w;
        double* yn = y.data.data() + ni * oc * oh * ow;
        for (std::size_t o = 0; o < oc; ++o) {
            const double* wo = weight_.data.data() + o * c * kh * kw;
            double* yo = yn + o * oh * ow;
            for (std::size_t i = 0; i < oh; ++i) {
                for (std::size_t j = 0; j < ow; ++j) {
                    double acc = bias_[o];
                    for (std::size_t ci = 0; ci < c; ++ci) {
                        const double* xc = xn + ci * h * w;
                        const double* wc = wo + ci * kh * kw;
                        for (std::size_t u = 0; u < kh; ++u) {
                            const double* xrow = xc + (i * stride_ + u) * w + j * stride_;
                            const double* wrow = wc + u * kw;
                            for (std::size_t v = 0; v < kw; ++v) acc += xrow[v] * wrow[v];
                        }
                    }
                    yo[i * ow + j] = acc;
                }
            }
        }
    }
    return y;
}

Tensor Conv2dLayer::backward(const Tensor& grad_out, const LayerCache& cache,
                             std::vector<Tensor>& param_grads) const {
    const Tensor& x = cache.input;
    std::size_t n, c, h, w;
    conv_input_dims(x, in_channels(), describe(), n, c, h, w);
    std::size_t kh = kernel_h(), kw = kernel_w();
    std::size_t oh = (h - kh) / stride_ + 1;
    std::size_t ow = (w - kw) / stride_ + 1;
    std::size_t oc = out_channels();
    if (grad_out.shape != std::vector<std::size_t>{n, oc, oh, ow}) {
        throw std::invalid_argument(describe() + ": output gradient has shape " + grad_out.shape_str());
    }
    Tensor dw(weight_.shape);
    Tensor db(bias_.shape);
    Tensor dx(x.shape);
    for (std::size_t ni = 0; ni < n; ++ni) {
        const double* xn = x.data.data() + ni * c * h * w;
        double* dxn = dx.data.data() + ni * c * h * w;
        const double* gn = grad_out.data.data() + ni * oc * oh * ow;
        for (std::size_t o = 0; o < oc; ++o) {
            const double* wo = weight_.data.data() + o * c * kh * kw;
            double* dwo = dw.data.data() + o * c * kh * kw;
            const double* go = gn + o * oh * ow;
            for (std::size_t i = 0; i < oh; ++i) {
                for (std::size_t j = 0; j < ow; ++j) {
                    double g = go[i * ow + j];
                    if (g == 0.0) continue;
                    db[o] += g;
                    for (std::size_t ci = 0; ci < c; ++ci) {
                        const double* xc = xn + ci * h * w;
                        double* dxc = dxn + ci * h * w;
                        const double* wc = wo + ci * kh * kw;
                        double* dwc = dwo + ci * kh * kw;
                        for (std::size_t u = 0; u < kh; ++u) {
                            std::size_t row = (i * stride_ + u) * w + j * stride_;
                            for (std::size_t v = 0; v < kw; ++v) {
                                dwc[u * kw + v] += g * xc[row + v];
                                dxc[row + v] += g * wc[u * kw + v];
                            }
                        }
                    }
                }
            }
        }
    }
    param_grads.push_back(std::move(dw));
    param_grads.push_back(std::move(db));
    return dx;
}

std::unique_ptr<Layer> Conv2dLayer::clone() const {
    return std::make_unique<Conv2dLayer>(stride_, weight_, bias_);
}

// ---- relu ----

Tensor ReluLayer::forward(const Tensor& x, LayerCache& cache, bool, Rng*) const {
    cache.input = x;
    Tensor y = x;
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return y;
}

Tensor ReluLayer::backward(const Tensor& grad_out, const LayerCache& cache,
                           std::vector<Tensor>&) const {
    if (!grad_out.same_shape(cache.input)) {
        throw std::invalid_argument("relu: output gradient shape " + grad_out.shape_str() +
                                    " does not match input " + cache.input.shape_str());
    }
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.numel(); ++i) {
        if (cache.input[i] <= 0.0) dx[i] = 0.0;
    }
    return dx;
}

// ---- sigmoid ----

Tensor SigmoidLayer::forward(const Tensor& x, LayerCache& cache, bool, Rng*) const {
    Tensor y = x;
    for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
    cache.aux = y;  // backward needs only the output
    cache.input.shape = x.shape;
    return y;
}

Tensor SigmoidLayer::backward(const Tensor& grad_out, const LayerCache& cache,
                              std::vector<Tensor>&) const {
    if (!grad_out.same_shape(cache.aux)) {
        throw std::invalid_argument("sigmoid: output gradient shape " + grad_out.shape_str() +
                                    " does not match " + cache.aux.shape_str());
    }
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.numel(); ++i) {
        double y = cache.aux[i];
        dx[i] *= y * (1.0 - y);
    }
    return dx;
}

// ---- dropout ----

DropoutLayer::DropoutLayer(double keep_prob) : keep_prob_(keep_prob) {
    if (!(keep_prob > 0.0) || keep_prob > 1.0) {
        throw std::invalid_argument("dropout: keep probability must be in (0, 1]");
    }
}

std::string DropoutLayer::describe() const {
    std::ostringstream os;
    os << "dropout(keep=" << keep_prob_ << ")";
    return os.str();
}

Tensor DropoutLayer::forward(const Tensor& x, LayerCache& cache, bool train, Rng* rng) const {
    cache.input.shape = x.shape;
    if (!train || keep_prob_ == 1.0) {
        return x;  // identity in eval mode
    }
    if (rng == nullptr) {
        throw std::invalid_argument("dropout: train-mode forward requires an rng");
    }
    Tensor mask(x.shape);
    double inv = 1.0 / keep_prob_;
    for (double& m : mask.data) m = rng->uniform() < keep_prob_ ? inv : 0.0;
    Tensor y = x;
    for (std::size_t i = 0; i < y.numel(); ++i) y[i] *= mask[i];
    cache.aux = std::move(mask);
    return y;
}

Tensor DropoutLayer::backward(const Tensor& grad_out, const LayerCache& cache,
                              std::vector<Tensor>&) const {
    if (grad_out.shape != cache.input.shape) {
        throw std::invalid_argument("dropout: output gradient shape " + grad_out.shape_str() +
                                    " does not match input " + shape_str(cache.input.shape));
    }
    if (cache.aux.numel() == 0) return grad_out;  // eval-mode trace
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] *= cache.aux[i];
    return dx;
}

}  // namespace clad
