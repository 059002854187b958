#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oucd/data/manifest.hpp"
#include "oucd/data/rain.hpp"
#include "oucd/data/scene.hpp"
#include "oucd/train/settings.hpp"

namespace fixture {

// Default streak counts scaled by area, so every size gets the rain density
// the defaults give a 128x128 patch.
inline oucd::RainParams rain_for(int size) {
    oucd::RainParams p;
    const double area = static_cast<double>(size) * size / (128.0 * 128.0);
    p.streak_count.lo = std::max(1, static_cast<int>(std::lround(p.streak_count.lo * area)));
    p.streak_count.hi = std::max(p.streak_count.lo, static_cast<int>(std::lround(p.streak_count.hi * area)));
    return p;
}

// n procedural rainy/clean pairs of side `size`.
inline std::vector<oucd::ImagePair> pairs(int n, int size, std::uint64_t seed) {
    std::vector<oucd::ImagePair> out;
    for (int i = 0; i < n; ++i) {
        oucd::RainParams p = rain_for(size);
        p.seed = seed * 1000 + static_cast<std::uint64_t>(i);
        const auto clean = oucd::generate_scene(size, size, p.seed);
        auto pair = oucd::synthesize_pair(clean, p);
        out.push_back({"img" + std::to_string(i), std::move(pair.rainy), std::move(pair.clean)});
    }
    return out;
}

// Short small-preset run on 32x32 patches.
inline oucd::TrainConfig quick_config(long long steps) {
    oucd::TrainConfig c;
    c.batch_size = 2;
    c.patch_size = 32;
    c.total_epochs = 1000;
    c.max_steps = steps;
    c.lr_schedule = {{0, 1e-3}};
    return c;
}

} // namespace fixture
