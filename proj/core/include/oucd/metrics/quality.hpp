#pragma once

#include <vector>

#include "oucd/tensor/tensor.hpp"

namespace oucd {

/// 10 log10(peak^2 / MSE) over all elements. Identical inputs give +infinity.
/// Throws ContractError on shape mismatch, UsageError if peak <= 0.
[[nodiscard]] double psnr(const Tensor<float>& a, const Tensor<float>& b, double peak = 1.0);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1. The SSIM map is averaged over valid window positions of
/// each (sample, channel) plane, then over planes.
/// Throws UsageError when min(H, W) < 11.
[[nodiscard]] double ssim(const Tensor<float>& a, const Tensor<float>& b);

/// Normalized 1-D Gaussian taps used by ssim (the window is their outer product).
[[nodiscard]] std::vector<double> ssim_gaussian_taps();

} // namespace oucd
