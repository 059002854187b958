#pragma once

// Reference implementations used as test oracles. None of these call into the
// library's kernels; they are deliberately naive so they are easy to audit.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "oucd/tensor/tensor.hpp"

namespace oracle {

using oucd::Shape;
using oucd::Tensor;

/// Direct nested-loop cross-correlation in double precision.
Tensor<double> conv2d(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b,
                      int stride, int pad);

/// Window-by-window 2x2 max (stride 2).
Tensor<double> maxpool2(const Tensor<double>& x);

/// Per-output-pixel bilinear sample at half-pixel centres, clamped at the border.
Tensor<double> bilinear(const Tensor<double>& x, int out_h, int out_w);

/// Central differences of a scalar function of one tensor.
std::vector<double> numeric_gradient(const std::function<double(const Tensor<double>&)>& f,
                                     Tensor<double> x, double step = 1e-5);

double psnr(const Tensor<float>& a, const Tensor<float>& b, double peak = 1.0);

/// SSIM with an explicitly built 11x11 window evaluated at every valid position.
double ssim(const Tensor<float>& a, const Tensor<float>& b);

/// Trainable scalars of a square-kernel conv with bias.
constexpr std::size_t conv_params(std::size_t in, std::size_t out, std::size_t k = 3) {
    return k * k * in * out + out;
}

/// Parameter count of the two-branch network summed layer by layer from the
/// filter lists (overcomplete encoder, undercomplete encoder); decoders mirror.
std::size_t network_params(const std::vector<std::size_t>& oc, const std::vector<std::size_t>& uc,
                           bool with_oc, bool with_uc, bool with_fusion);

struct RainSettings {
    int count_lo = 100;
    int count_hi = 100;
    double angle_lo = 60.0;
    double angle_hi = 120.0;
    int length_lo = 8;
    int length_hi = 24;
    int width_lo = 1;
    int width_hi = 2;
    double intensity_lo = 0.1;
    double intensity_hi = 0.5;
    double sigma = 0.5;
};

/// Monte-Carlo estimate of the mean residual value over `samples` independently
/// drawn streak fields of size h x w.
double rain_mean(int h, int w, const RainSettings& s, int samples, std::uint32_t seed);

/// Fresh empty directory under the system temp dir; removed by the destructor.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// Deterministic uniform tensor in [lo, hi).
template <typename T>
Tensor<T> random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p);

} // namespace oracle
