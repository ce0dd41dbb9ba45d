#include "clad/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clad {

Tensor softmax_with_temperature(const Tensor& logits, double temperature) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("softmax_with_temperature: temperature must be positive");
    }
    if (logits.rank() == 0 || logits.numel() == 0) {
        throw std::invalid_argument("softmax_with_temperature: empty logits");
    }
    std::size_t width = logits.shape.back();
    std::size_t rows = logits.numel() / width;
    Tensor out(logits.shape);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* l = logits.data.data() + r * width;
        double* p = out.data.data() + r * width;
        double m = l[0] / temperature;
        for (std::size_t j = 1; j < width; ++j) m = std::max(m, l[j] / temperature);
        double sum = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            p[j] = std::exp(l[j] / temperature - m);
            sum += p[j];
        }
        for (std::size_t j = 0; j < width; ++j) p[j] /= sum;
    }
    return out;
}

static void check_mse_shapes(const Tensor& pred, const Tensor& target) {
    if (pred.numel() != target.numel()) {
        throw std::invalid_argument("mse: element counts differ, " + pred.shape_str() + " vs " +
                                    target.shape_str());
    }
    if (pred.rank() >= 2 && target.rank() >= 2 && pred.dim(0) != target.dim(0)) {
        throw std::invalid_argument("mse: batch sizes differ, " + pred.shape_str() + " vs " +
                                    target.shape_str());
    }
}

double mse_value(const Tensor& pred, const Tensor& target) {
    check_mse_shapes(pred, target);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.numel());
}

Tensor mse_grad(const Tensor& pred, const Tensor& target) {
    check_mse_shapes(pred, target);
    Tensor g(pred.shape);
    double scale = 2.0 / static_cast<double>(pred.numel());
    for (std::size_t i = 0; i < pred.numel(); ++i) g[i] = scale * (pred[i] - target[i]);
    return g;
}

static void check_ce_shapes(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2) {
        throw std::invalid_argument("cross_entropy: logits must be (N, L), got " + logits.shape_str());
    }
    if (logits.dim(0) != labels.size()) {
        throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for batch of " + std::to_string(logits.dim(0)));
    }
    int l = static_cast<int>(logits.dim(1));
    for (int y : labels) {
        if (y < 0 || y >= l) throw std::invalid_argument("cross_entropy: label out of range");
    }
}

double cross_entropy_value(const Tensor& logits, const std::vector<int>& labels) {
    check_ce_shapes(logits, labels);
    Tensor p = softmax_with_temperature(logits, 1.0);
    std::size_t n = logits.dim(0), l = logits.dim(1);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pi = std::max(p[i * l + static_cast<std::size_t>(labels[i])], 1e-12);
        acc -= std::log(pi);
    }
    return acc / static_cast<double>(n);
}

Tensor cross_entropy_grad(const Tensor& logits, const std::vector<int>& labels) {
    check_ce_shapes(logits, labels);
    Tensor g = softmax_with_temperature(logits, 1.0);
    std::size_t n = logits.dim(0), l = logits.dim(1);
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i * l + static_cast<std::size_t>(labels[i])] -= 1.0;
        for (std::size_t j = 0; j < l; ++j) g[i * l + j] *= inv_n;
    }
    return g;
}

}  // namespace clad
