#include "clad/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace clad {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> s, double fill)
    : shape(std::move(s)), data(shape_numel(shape), fill) {
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("tensor: zero extent in shape " + clad::shape_str(shape));
    }
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> values)
    : shape(std::move(s)), data(std::move(values)) {
    if (shape_numel(shape) != data.size()) {
        throw std::invalid_argument("tensor: shape " + clad::shape_str(shape) + " does not match " +
                                    std::to_string(data.size()) + " values");
    }
}

Tensor Tensor::row(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

std::string Tensor::shape_str() const { return clad::shape_str(shape); }

void Tensor::check_finite(const std::string& what) const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw std::runtime_error(what + ": non-finite value encountered");
        }
    }
}

Tensor stack_batch(const std::vector<Tensor>& samples) {
    if (samples.empty()) throw std::invalid_argument("stack_batch: empty sample list");
    const auto& s0 = samples.front().shape;
    std::vector<std::size_t> shape;
    shape.push_back(samples.size());
    shape.insert(shape.end(), s0.begin(), s0.end());
    Tensor out(shape);
    std::size_t d = samples.front().numel();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].shape != s0) {
            throw std::invalid_argument("stack_batch: sample " + std::to_string(i) + " has shape " +
                                        samples[i].shape_str() + ", expected " + shape_str(s0));
        }
        std::copy(samples[i].data.begin(), samples[i].data.end(), out.data.begin() + i * d);
    }
    return out;
}

Tensor stack_batch(const std::vector<Tensor>& samples, const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw std::invalid_argument("stack_batch: empty index list");
    std::vector<Tensor> picked;
    picked.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= samples.size()) throw std::out_of_range("stack_batch: index out of range");
        picked.push_back(samples[idx]);
    }
    return stack_batch(picked);
}

Tensor batch_row(const Tensor& batch, std::size_t i) {
    if (batch.rank() < 2) throw std::invalid_argument("batch_row: batch must have rank >= 2");
    if (i >= batch.dim(0)) throw std::out_of_range("batch_row: row out of range");
    std::vector<std::size_t> shape(batch.shape.begin() + 1, batch.shape.end());
    std::size_t d = shape_numel(shape);
    Tensor out(shape);
    std::copy(batch.data.begin() + i * d, batch.data.begin() + (i + 1) * d, out.data.begin());
    return out;
}

}  // namespace clad
