#pragma once

#include <cstdint>

#include "oucd/tensor/tensor.hpp"

namespace oucd {

/// Procedural clean image (1, 3, h, w): a two-colour linear gradient with a
/// handful of flat discs and rectangles on top. Values stay in [0.05, 0.8] so
/// added rain rarely clips. Pure function of (h, w, seed).
[[nodiscard]] Tensor<float> generate_scene(int h, int w, std::uint64_t seed);

} // namespace oucd
