#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oucd/data/manifest.hpp"
#include "oucd/metrics/report.hpp"
#include "oucd/model/network.hpp"
#include "oucd/train/checkpoint.hpp"

namespace oucd {

/// Full-image inference: reflect-pads the bottom/right edges up to the model's
/// input divisor, runs the network and crops back to the input size.
[[nodiscard]] Tensor<float> infer_padded(const Network<float>& net, const Tensor<float>& y);

/// Element-wise clamp to [0, 1].
[[nodiscard]] Tensor<float> clamp_unit(Tensor<float> t);

/// PSNR / SSIM of every pair's clamped prediction against its clean image, in
/// input order, with per-image inference time. Parameters are not modified.
/// When `prediction_dir` is non-empty the predictions are saved there as PNG.
[[nodiscard]] MetricReport evaluate(const Network<float>& net, const std::vector<ImagePair>& pairs,
                                    const std::string& dataset,
                                    const std::filesystem::path& prediction_dir = {});

/// No-op reference: the rainy input itself is scored as the prediction.
[[nodiscard]] MetricReport evaluate_identity(const std::vector<ImagePair>& pairs,
                                             const std::string& dataset);

/// Loads the checkpoint's network and evaluates it. If `expected` is given its
/// fingerprint must match the checkpoint's, otherwise CheckpointError.
[[nodiscard]] MetricReport evaluate_checkpoint(const CheckpointBundle& bundle,
                                               const std::vector<ImagePair>& pairs,
                                               const std::string& dataset,
                                               const ModelConfig* expected = nullptr);

} // namespace oucd
