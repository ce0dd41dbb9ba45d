#pragma once

#include "clad/losses.hpp"
#include "clad/network.hpp"

namespace clad {

/// Compares analytic gradients (network parameters, loss-owned parameters, and
/// the input batch) against central finite differences of the scalar loss.
/// Every forward evaluation replays the same rng stream, so train-mode dropout
/// masks are identical across evaluations and the loss is a deterministic
/// function of the perturbed values.
///
/// Returns the worst relative error |a - fd| / max(|a|, |fd|, 1e-8).
double grad_check(Network& net, LossFn& loss, const Tensor& batch, double fd_step,
                  std::uint64_t rng_seed = 12345);

}  // namespace clad
