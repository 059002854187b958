#pragma once

#include <cstdint>

#include "oucd/common/config_file.hpp"
#include "oucd/common/rng.hpp"
#include "oucd/tensor/tensor.hpp"

namespace oucd {

template <typename T>
struct Interval {
    T lo{};
    T hi{};

    bool operator==(const Interval&) const = default;
};

/// Streak generator settings. Ranges are inclusive.
struct RainParams {
    Interval<int> streak_count{40, 160};
    /// Degrees from horizontal.
    Interval<double> angle_deg{60.0, 120.0};
    Interval<int> length_px{8, 24};
    Interval<int> width_px{1, 2};
    Interval<double> intensity{0.1, 0.5};
    double blur_sigma = 0.5;
    std::uint64_t seed = 0;

    /// Throws UsageError on empty ranges, negative values or intensity outside (0, 1].
    void validate() const;

    /// Reads the [rain] section; missing keys keep the defaults above.
    static RainParams from_config(const ConfigFile& cfg);
    void to_config(ConfigFile& cfg) const;

    bool operator==(const RainParams&) const = default;
};

/// Rainy observation y, clean image x and residual r, each (1, 3, H, W).
struct RainPair {
    Tensor<float> rainy;
    Tensor<float> clean;
    Tensor<float> residual;
};

/// One sampled streak. Centre in pixel coordinates, angle in degrees.
struct Streak {
    double cx = 0.0;
    double cy = 0.0;
    double angle_deg = 90.0;
    int length = 1;
    int width = 1;
    double intensity = 0.0;
};

/// Draws the streak list for `params.seed`: count first, then per streak
/// centre x, centre y, angle, length, width, intensity.
[[nodiscard]] std::vector<Streak> sample_streaks(int h, int w, const RainParams& params);

/// Coverage in [0, 1] of pixel centre (px, py) by a streak: the segment is
/// thickened to `width`, with a one-pixel linear falloff at its edge.
[[nodiscard]] double streak_coverage(const Streak& s, double px, double py) noexcept;

/// Non-negative achromatic residual (1, 3, h, w): streaks are max-composited,
/// Gaussian blurred with clamped borders, and the luminance copied to 3 channels.
/// Throws UsageError if h or w is below 8.
[[nodiscard]] Tensor<float> render_streaks(int h, int w, const RainParams& params);

/// y = clip(x + r, 0, 1). Throws InputValidationError if x leaves [0, 1] or is not
/// a single 3-channel image.
[[nodiscard]] RainPair synthesize_pair(const Tensor<float>& clean, const RainParams& params);

/// Same random square window from all three images. `size` must be a multiple
/// of 32 no larger than min(H, W); otherwise UsageError.
[[nodiscard]] RainPair crop_patch(const RainPair& pair, int size, Rng& rng);

} // namespace oucd
