#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "oucd/common/config_file.hpp"
#include "oucd/metrics/loss.hpp"
#include "oucd/model/config.hpp"

namespace oucd {

struct LrStep {
    /// First epoch (0-based) at which `lr` applies.
    int epoch = 0;
    double lr = 2e-4;

    bool operator==(const LrStep&) const = default;
};

struct TrainConfig {
    ModelConfig model = small_model();
    int batch_size = 2;
    int patch_size = 32;
    std::vector<LrStep> lr_schedule{{0, 2e-4}, {30, 1e-4}};
    int total_epochs = 60;
    /// Stop after this many optimizer steps even mid-epoch; 0 means no limit.
    long long max_steps = 0;
    LossConfig loss;
    std::uint64_t seed = 0;
    /// Global-norm gradient clipping threshold; 0 disables it.
    double grad_clip = 0.0;
    /// Empty: seeded-random perceptual extractor.
    std::filesystem::path extractor_weights;

    /// Defaults per preset: canonical trains on 128 patches, small on 32.
    static TrainConfig defaults(const std::string& preset);

    /// Throws ConfigError on non-positive sizes, bad schedules or a patch size
    /// that the model cannot consume.
    void validate() const;
    [[nodiscard]] double lr_at(int epoch) const;

    /// Reads the [model], [train] and [loss] sections on top of the preset defaults.
    static TrainConfig from_config(const ConfigFile& cfg);
    [[nodiscard]] ConfigFile to_config() const;
};

/// "0:2e-4,30:1e-4". Throws ConfigError on malformed text.
[[nodiscard]] std::vector<LrStep> parse_lr_schedule(const std::string& text);
[[nodiscard]] std::string format_lr_schedule(const std::vector<LrStep>& schedule);

/// Every dotted key a config file or override may set.
[[nodiscard]] const std::set<std::string>& known_config_keys();

} // namespace oucd
