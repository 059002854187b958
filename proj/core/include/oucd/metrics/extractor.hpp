#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oucd/tensor/tape.hpp"

namespace oucd {

/// Fixed VGG-style feature stack used by the perceptual loss:
///   stage 1: conv 3->16, relu, conv 16->16, relu  (tap 0), maxpool
///   stage 2: conv 16->32, relu, conv 32->32, relu (tap 1), maxpool
///   stage 3: conv 32->64, relu, conv 64->64, relu (tap 2)
/// All convs are 3x3 with padding 1. Weights are bound frozen and never
/// receive gradients.
template <typename T>
class FeatureExtractor {
public:
    static constexpr std::uint64_t kDefaultSeed = 0x0fea7u;
    static constexpr int kTaps = 3;

    /// Uniform weights with bound sqrt(6 / fan_in), zero bias.
    static FeatureExtractor seeded(std::uint64_t seed = kDefaultSeed);
    /// Reads records extractor.conv<i>.weight / .bias from a checkpoint-format
    /// file. Throws IoError if the file is malformed or a record is missing or
    /// has the wrong shape.
    static FeatureExtractor from_file(const std::filesystem::path& path);
    /// Writes the weights in the format from_file reads.
    void save(const std::filesystem::path& path) const;

    /// Tap outputs for `x` (N, 3, H, W); H and W must be divisible by 4.
    [[nodiscard]] std::vector<Var> forward(Tape<T>& tape, Var x) const;

    struct Layer {
        std::string name;
        Tensor<T> weight;
        Tensor<T> bias;
    };
    [[nodiscard]] const std::vector<Layer>& layers() const noexcept { return layers_; }

    template <typename U>
    [[nodiscard]] FeatureExtractor<U> cast() const {
        FeatureExtractor<U> out;
        for (const auto& l : layers_) {
            out.layers_.push_back({l.name, l.weight.template cast<U>(), l.bias.template cast<U>()});
        }
        return out;
    }

private:
    template <typename>
    friend class FeatureExtractor;

    FeatureExtractor() = default;
    static FeatureExtractor empty_layers();

    std::vector<Layer> layers_;
};

extern template class FeatureExtractor<float>;
extern template class FeatureExtractor<double>;

} // namespace oucd
