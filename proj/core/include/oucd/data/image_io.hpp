#pragma once

#include <filesystem>
#include <span>

#include "oucd/tensor/tensor.hpp"

namespace oucd {

/// 8-bit RGB PNG to a (1, 3, H, W) tensor in [0, 1]. Palette images are
/// expanded; grayscale, alpha and unreadable files raise IoError.
[[nodiscard]] Tensor<float> load_image(const std::filesystem::path& path);

/// Writes sample 0 of a 3-channel tensor as RGB PNG, clamping to [0, 1] and
/// quantizing with round(v * 255). Parent directories must exist.
void save_image(const Tensor<float>& image, const std::filesystem::path& path);

/// Writes one H x W plane of values in [0, 1] as an 8-bit grayscale PNG.
void save_gray(std::span<const float> plane, int height, int width,
               const std::filesystem::path& path);

/// Clamp-and-round quantization used by save_image.
[[nodiscard]] unsigned char quantize(float v) noexcept;

} // namespace oucd
