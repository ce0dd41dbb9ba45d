#pragma once

#include <vector>

#include "clad/tensor.hpp"

namespace clad {

/// Affine map taking training-data values into [0, 1]. Fitted once on the
/// training set and recorded in every model that consumes raw inputs.
struct InputScaler {
    double lo = 0.0;
    double hi = 1.0;

    static InputScaler fit(const std::vector<Tensor>& samples);
    static InputScaler identity() { return {0.0, 1.0}; }

    Tensor apply(const Tensor& x) const;
    /// Positive scale factor of the map (0 when the fit was degenerate).
    double gain() const { return hi > lo ? 1.0 / (hi - lo) : 0.0; }
};

}  // namespace clad
