#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace clad {

/// Dense n-dimensional array of doubles, row-major.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s, double fill = 0.0);
    Tensor(std::vector<std::size_t> s, std::vector<double> values);

    static Tensor row(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape[i]; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // rank-2 access
    double& at2(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double at2(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    std::string shape_str() const;

    /// Throws std::runtime_error if any value is NaN or infinite.
    void check_finite(const std::string& what) const;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

/// Stacks samples (all of identical shape) into a batch of shape (N, sample...).
Tensor stack_batch(const std::vector<Tensor>& samples);
/// Stacks the selected samples into a batch, in index order.
Tensor stack_batch(const std::vector<Tensor>& samples, const std::vector<std::size_t>& indices);
/// Extracts row i of a batch as a tensor of the per-sample shape.
Tensor batch_row(const Tensor& batch, std::size_t i);

}  // namespace clad
