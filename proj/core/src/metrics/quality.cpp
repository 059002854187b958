#include "oucd/metrics/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oucd/common/error.hpp"
#include "oucd/tensor/ops.hpp"

namespace oucd {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 1.0) * (0.01 * 1.0);
constexpr double kC2 = (0.03 * 1.0) * (0.03 * 1.0);

void check_shapes(const Tensor<float>& a, const Tensor<float>& b, const char* what) {
    if (!(a.shape() == b.shape())) {
        throw ContractError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " +
                            b.shape().str());
    }
}

// Valid-mode separable filtering of an h x w plane with the window taps.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& taps) {
    const int oh = h - kWindow + 1;
    const int ow = w - kWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += taps[k] * src[static_cast<std::size_t>(y) * w + x + k];
            }
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                acc += taps[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
            }
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

} // namespace

std::vector<double> ssim_gaussian_taps() {
    std::vector<double> taps(kWindow);
    double total = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        taps[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
        total += taps[i];
    }
    for (auto& t : taps) {
        t /= total;
    }
    return taps;
}

double psnr(const Tensor<float>& a, const Tensor<float>& b, double peak) {
    check_shapes(a, b, "psnr");
    if (!(peak > 0.0)) {
        throw UsageError("psnr peak must be positive");
    }
    const double mse = ops::mean_squared_error(a, b);
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor<float>& a, const Tensor<float>& b) {
    check_shapes(a, b, "ssim");
    const Shape& s = a.shape();
    if (std::min(s.h, s.w) < kWindow) {
        throw UsageError("ssim needs images of at least 11x11, got " + s.str());
    }
    const auto taps = ssim_gaussian_taps();
    const std::size_t plane = s.plane();
    double total = 0.0;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const float* pa = a.plane(n, c);
            const float* pb = b.plane(n, c);
            std::vector<double> x(pa, pa + plane);
            std::vector<double> y(pb, pb + plane);
            std::vector<double> xx(plane);
            std::vector<double> yy(plane);
            std::vector<double> xy(plane);
            for (std::size_t i = 0; i < plane; ++i) {
                xx[i] = x[i] * x[i];
                yy[i] = y[i] * y[i];
                xy[i] = x[i] * y[i];
            }
            const auto mx = filter_valid(x, s.h, s.w, taps);
            const auto my = filter_valid(y, s.h, s.w, taps);
            const auto mxx = filter_valid(xx, s.h, s.w, taps);
            const auto myy = filter_valid(yy, s.h, s.w, taps);
            const auto mxy = filter_valid(xy, s.h, s.w, taps);
            double acc = 0.0;
            for (std::size_t i = 0; i < mx.size(); ++i) {
                const double vx = mxx[i] - mx[i] * mx[i];
                const double vy = myy[i] - my[i] * my[i];
                const double cxy = mxy[i] - mx[i] * my[i];
                acc += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2)) /
                       ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
            }
            total += acc / static_cast<double>(mx.size());
        }
    }
    return total / (static_cast<double>(s.n) * s.c);
}

} // namespace oucd
