#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "oucd/common/config_file.hpp"

namespace oucd {

/// Which parts of the two-branch network are active.
enum class Variant { undercomplete_only, overcomplete_only, oucd_no_msff, oucd };

[[nodiscard]] std::string_view to_string(Variant v) noexcept;
/// Throws UsageError for unknown names.
[[nodiscard]] Variant parse_variant(std::string_view name);
/// Row labels used in ablation reports.
[[nodiscard]] std::string_view ablation_label(Variant v) noexcept;
[[nodiscard]] const std::vector<Variant>& ablation_order();

enum class Resample { upsample2, maxpool2 };

enum class LayerKind { conv, maxpool2, upsample2, relu, add_skip, conv1x1 };

[[nodiscard]] std::string_view to_string(LayerKind k) noexcept;

/// One layer of a branch. Conv kinds carry kernel/filters/padding; the rest carry none.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    int filters = 0;
    int kernel = 0;
    int padding = 0;
    /// Encoder block whose output feeds an add_skip.
    int skip_from = 0;

    bool operator==(const LayerSpec&) const = default;
};

struct BlockSpec {
    int filters = 0;
    Resample resample = Resample::maxpool2;

    bool operator==(const BlockSpec&) const = default;
};

enum class SkipMode { additive };

struct BranchConfig {
    std::vector<BlockSpec> encoder;
    std::vector<BlockSpec> decoder;
    SkipMode skip_mode = SkipMode::additive;

    bool operator==(const BranchConfig&) const = default;
};

/// Expands a branch into its flat layer sequence. Encoder block: conv,
/// resample, relu. Decoder block j: conv, add_skip(encoder block n+1-j),
/// resample, relu.
[[nodiscard]] std::vector<LayerSpec> expand_layers(const BranchConfig& branch, int kernel,
                                                   int padding);

/// Multi-scale fusion target. Scales are spatial size relative to the network input.
struct MsffConfig {
    struct Source {
        double scale = 1.0;
        int channels = 0;
    };
    std::vector<Source> sources;
    double target_scale = 1.0;
    int target_channels = 0;

    /// Integer downsampling factor per source; ConfigError if any is not a whole number >= 1.
    [[nodiscard]] std::vector<int> factors() const;
};

struct ModelConfig {
    std::string preset = "small";
    Variant variant = Variant::oucd;
    int in_channels = 3;
    int out_channels = 3;
    int kernel = 3;
    int padding = 1;
    BranchConfig overcomplete;
    BranchConfig undercomplete;

    [[nodiscard]] bool uses_overcomplete() const noexcept {
        return variant != Variant::undercomplete_only;
    }
    [[nodiscard]] bool uses_undercomplete() const noexcept {
        return variant != Variant::overcomplete_only;
    }
    [[nodiscard]] bool uses_msff() const noexcept { return variant == Variant::oucd; }

    /// Overcomplete encoder maps fused into the output of the first undercomplete encoder block.
    [[nodiscard]] MsffConfig encoder_fusion() const;
    /// Overcomplete decoder maps fused into the input of the last undercomplete decoder block.
    [[nodiscard]] MsffConfig decoder_fusion() const;

    /// Spatial divisor the input must respect (2^undercomplete depth, or 1).
    [[nodiscard]] int required_divisor() const noexcept;

    /// Throws ConfigError on structural inconsistencies.
    void validate() const;
    /// True when the filter counts equal the published tables.
    [[nodiscard]] bool canonical() const;

    /// Deterministic text form; the checkpoint fingerprint hashes this.
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::uint64_t fingerprint() const;
    [[nodiscard]] ConfigFile to_config() const;
    /// Reads the [model] section. Missing keys fall back to the preset named by model.preset.
    static ModelConfig from_config(const ConfigFile& cfg);

    bool operator==(const ModelConfig&) const = default;
};

/// Published configuration: overcomplete 32-64-128, undercomplete 32-...-512.
[[nodiscard]] ModelConfig canonical_model(Variant variant = Variant::oucd);
/// Quarter-width desk-scale configuration with identical structure.
[[nodiscard]] ModelConfig small_model(Variant variant = Variant::oucd);
[[nodiscard]] ModelConfig preset_model(std::string_view preset, Variant variant);

/// Branch builders from filter lists (decoder mirrors the encoder).
[[nodiscard]] BranchConfig overcomplete_branch(std::vector<int> encoder_filters);
[[nodiscard]] BranchConfig undercomplete_branch(std::vector<int> encoder_filters);

} // namespace oucd
