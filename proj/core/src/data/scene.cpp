#include "oucd/data/scene.hpp"

#include <array>
#include <cmath>
#include <random>

#include "oucd/common/rng.hpp"

namespace oucd {

Tensor<float> generate_scene(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<float> colour(0.05F, 0.8F);
    std::uniform_real_distribution<float> unit(0.0F, 1.0F);
    auto pick = [&] { return std::array<float, 3>{colour(rng), colour(rng), colour(rng)}; };

    Tensor<float> img(Shape{1, 3, h, w});
    const auto a = pick();
    const auto b = pick();
    const float gx = unit(rng) - 0.5F;
    const float gy = unit(rng) - 0.5F;
    const float norm = std::abs(gx) + std::abs(gy) + 1e-6F;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float u = (gx * (x / float(w) - 0.5F) + gy * (y / float(h) - 0.5F)) / norm + 0.5F;
            for (int c = 0; c < 3; ++c) {
                img.at(0, c, y, x) = a[c] + (b[c] - a[c]) * u;
            }
        }
    }

    std::uniform_int_distribution<int> shapes(3, 6);
    const int count = shapes(rng);
    for (int s = 0; s < count; ++s) {
        const auto col = pick();
        const bool disc = unit(rng) < 0.5F;
        const float cx = unit(rng) * w;
        const float cy = unit(rng) * h;
        const float rx = (0.08F + 0.25F * unit(rng)) * w;
        const float ry = (0.08F + 0.25F * unit(rng)) * h;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const float dx = (x + 0.5F - cx) / rx;
                const float dy = (y + 0.5F - cy) / ry;
                const bool inside = disc ? dx * dx + dy * dy <= 1.0F
                                         : std::abs(dx) <= 1.0F && std::abs(dy) <= 1.0F;
                if (inside) {
                    for (int c = 0; c < 3; ++c) {
                        img.at(0, c, y, x) = col[c];
                    }
                }
            }
        }
    }
    return img;
}

} // namespace oucd
