#pragma once

#include <cstdint>

#include "clad/datasets.hpp"

namespace clad {

/// Deterministic 28x28 stroke-rendered digit images (classes 0-9) with
/// per-sample affine jitter, stroke-width variation and pixel noise. Values
/// are byte-quantized so a write_idx/load_idx round trip is value-exact.
///
/// Serves as a self-contained stand-in when the official MNIST files are not
/// on disk; the latent-class semantics of the digit scenarios carry over.
LabeledDataset synth_digits(std::size_t per_class, std::uint64_t seed,
                            const std::string& split = "train");

}  // namespace clad
