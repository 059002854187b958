#include "oucd/data/rain.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <type_traits>

#include "oucd/common/error.hpp"

namespace oucd {
namespace {

template <typename T>
void check_interval(const Interval<T>& r, const char* name, T min_allowed) {
    if (r.lo > r.hi) {
        throw UsageError(std::string("rain.") + name + ": empty range");
    }
    if (r.lo < min_allowed) {
        throw UsageError(std::string("rain.") + name + ": value below " +
                         std::to_string(min_allowed));
    }
}

template <typename T>
Interval<T> read_interval(const ConfigFile& cfg, const std::string& key, Interval<T> fallback) {
    std::vector<T> v;
    if constexpr (std::is_integral_v<T>) {
        v = cfg.get_int_list(key, {fallback.lo, fallback.hi});
    } else {
        v = cfg.get_double_list(key, {fallback.lo, fallback.hi});
    }
    if (v.size() != 2) {
        throw UsageError(key + ": expected two comma-separated values");
    }
    return {v[0], v[1]};
}

template <typename T>
std::string interval_text(const Interval<T>& r) {
    std::ostringstream os;
    os << std::setprecision(17) << r.lo << "," << r.hi;
    return os.str();
}

std::vector<float> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += k[i + radius];
    }
    std::vector<float> out(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        out[i] = static_cast<float>(k[i] / total);
    }
    return out;
}

// Separable blur with clamped borders, in place on an h x w plane.
void blur(std::vector<float>& img, int h, int w, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    std::vector<float> tmp(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0F;
            for (int i = -r; i <= r; ++i) {
                acc += k[i + r] * img[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0F;
            for (int i = -r; i <= r; ++i) {
                acc += k[i + r] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
            }
            img[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
}

void check_clean(const Tensor<float>& x) {
    const Shape& s = x.shape();
    if (s.n != 1 || s.c != 3) {
        throw InputValidationError("clean image must be 1x3xHxW, got " + s.str());
    }
    for (const float v : x.data()) {
        if (!(v >= 0.0F && v <= 1.0F)) {
            throw InputValidationError("clean image values must lie in [0, 1]");
        }
    }
}

} // namespace

void RainParams::validate() const {
    check_interval(streak_count, "streak_count", 0);
    check_interval(angle_deg, "angle_deg", -360.0);
    check_interval(length_px, "length_px", 1);
    check_interval(width_px, "width_px", 1);
    check_interval(intensity, "intensity", 0.0);
    if (intensity.hi > 1.0 || intensity.hi <= 0.0) {
        throw UsageError("rain.intensity: upper bound must lie in (0, 1]");
    }
    if (!(blur_sigma >= 0.0)) {
        throw UsageError("rain.blur_sigma must be non-negative");
    }
}

RainParams RainParams::from_config(const ConfigFile& cfg) {
    RainParams p;
    p.streak_count = read_interval(cfg, "rain.streak_count", p.streak_count);
    p.angle_deg = read_interval(cfg, "rain.angle_deg", p.angle_deg);
    p.length_px = read_interval(cfg, "rain.length_px", p.length_px);
    p.width_px = read_interval(cfg, "rain.width_px", p.width_px);
    p.intensity = read_interval(cfg, "rain.intensity", p.intensity);
    p.blur_sigma = cfg.get_double("rain.blur_sigma", p.blur_sigma);
    p.validate();
    return p;
}

void RainParams::to_config(ConfigFile& cfg) const {
    cfg.set("rain.streak_count", interval_text(streak_count));
    cfg.set("rain.angle_deg", interval_text(angle_deg));
    cfg.set("rain.length_px", interval_text(length_px));
    cfg.set("rain.width_px", interval_text(width_px));
    cfg.set("rain.intensity", interval_text(intensity));
    std::ostringstream os;
    os << std::setprecision(17) << blur_sigma;
    cfg.set("rain.blur_sigma", os.str());
}

std::vector<Streak> sample_streaks(int h, int w, const RainParams& params) {
    Rng rng(params.seed);
    std::uniform_int_distribution<int> count_dist(params.streak_count.lo, params.streak_count.hi);
    const int count = count_dist(rng);
    std::uniform_real_distribution<double> xd(0.0, w);
    std::uniform_real_distribution<double> yd(0.0, h);
    std::uniform_real_distribution<double> ad(params.angle_deg.lo, params.angle_deg.hi);
    std::uniform_int_distribution<int> ld(params.length_px.lo, params.length_px.hi);
    std::uniform_int_distribution<int> wd(params.width_px.lo, params.width_px.hi);
    std::uniform_real_distribution<double> id(params.intensity.lo, params.intensity.hi);
    std::vector<Streak> out(static_cast<std::size_t>(count));
    for (auto& s : out) {
        s.cx = xd(rng);
        s.cy = yd(rng);
        s.angle_deg = ad(rng);
        s.length = ld(rng);
        s.width = wd(rng);
        s.intensity = id(rng);
    }
    return out;
}

double streak_coverage(const Streak& s, double px, double py) noexcept {
    const double a = s.angle_deg * std::numbers::pi / 180.0;
    // Image rows grow downward, so a positive angle points up and to the right.
    const double dx = std::cos(a);
    const double dy = -std::sin(a);
    const double half = 0.5 * s.length;
    const double rx = px - s.cx;
    const double ry = py - s.cy;
    const double t = std::clamp(rx * dx + ry * dy, -half, half);
    const double ex = rx - t * dx;
    const double ey = ry - t * dy;
    const double dist = std::sqrt(ex * ex + ey * ey);
    return std::clamp(0.5 * s.width + 0.5 - dist, 0.0, 1.0);
}

Tensor<float> render_streaks(int h, int w, const RainParams& params) {
    if (h < 8 || w < 8) {
        throw UsageError("render_streaks needs h, w >= 8");
    }
    params.validate();
    std::vector<float> lum(static_cast<std::size_t>(h) * w, 0.0F);
    for (const Streak& s : sample_streaks(h, w, params)) {
        const double reach = 0.5 * s.length + 0.5 * s.width + 1.0;
        const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - reach)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + reach)));
        const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - reach)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + reach)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double cov = streak_coverage(s, x + 0.5, y + 0.5);
                if (cov > 0.0) {
                    float& px = lum[static_cast<std::size_t>(y) * w + x];
                    px = std::max(px, static_cast<float>(s.intensity * cov));
                }
            }
        }
    }
    if (params.blur_sigma > 0.0) {
        blur(lum, h, w, params.blur_sigma);
    }
    Tensor<float> r(Shape{1, 3, h, w});
    for (int c = 0; c < 3; ++c) {
        std::copy(lum.begin(), lum.end(), r.plane(0, c));
    }
    return r;
}

RainPair synthesize_pair(const Tensor<float>& clean, const RainParams& params) {
    check_clean(clean);
    const Shape& s = clean.shape();
    RainPair pair{clean, clean, render_streaks(s.h, s.w, params)};
    auto y = pair.rainy.data();
    const auto r = pair.residual.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = std::min(y[i] + r[i], 1.0F);
    }
    return pair;
}

RainPair crop_patch(const RainPair& pair, int size, Rng& rng) {
    const Shape& s = pair.clean.shape();
    if (size <= 0 || size % 32 != 0) {
        throw UsageError("patch size " + std::to_string(size) + " is not a positive multiple of 32");
    }
    if (size > std::min(s.h, s.w)) {
        throw UsageError("patch size " + std::to_string(size) + " exceeds image " +
                         std::to_string(s.h) + "x" + std::to_string(s.w));
    }
    std::uniform_int_distribution<int> top_dist(0, s.h - size);
    std::uniform_int_distribution<int> left_dist(0, s.w - size);
    const int top = top_dist(rng);
    const int left = left_dist(rng);
    auto cut = [&](const Tensor<float>& t) {
        Tensor<float> out(Shape{s.n, s.c, size, size});
        for (int n = 0; n < s.n; ++n) {
            for (int c = 0; c < s.c; ++c) {
                for (int y = 0; y < size; ++y) {
                    const float* src = t.plane(n, c) + static_cast<std::size_t>(top + y) * s.w + left;
                    std::copy(src, src + size, out.plane(n, c) + static_cast<std::size_t>(y) * size);
                }
            }
        }
        return out;
    };
    return {cut(pair.rainy), cut(pair.clean), cut(pair.residual)};
}

} // namespace oucd
