#pragma once

#include <cstdint>
#include <vector>

#include "oucd/tensor/tensor.hpp"

// Forward and backward kernels for every primitive the network uses. These are
// plain functions over tensors; oucd::Tape strings them together for reverse mode.
namespace oucd::ops {

/// Convolution weights (out_channels, in_channels, k, k) and bias (out_channels, 1, 1, 1).
template <typename T>
struct ConvParams {
    Tensor<T> weight;
    Tensor<T> bias;
    int stride = 1;
    int padding = 0;

    [[nodiscard]] int out_channels() const noexcept { return weight.shape().n; }
    [[nodiscard]] int in_channels() const noexcept { return weight.shape().c; }
    [[nodiscard]] int kernel() const noexcept { return weight.shape().h; }
};

template <typename T>
struct ConvGrads {
    Tensor<T> input;
    Tensor<T> weight;
    Tensor<T> bias;
};

/// Output extent of a square-kernel cross-correlation; throws ConfigError when
/// channels mismatch or the result would be empty.
Shape conv2d_output_shape(const Shape& input, const Shape& weight, int stride, int padding);

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 int stride, int padding);

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvParams<T>& params) {
    return conv2d(input, params.weight, params.bias, params.stride, params.padding);
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input,
                             const Tensor<T>& weight, int stride, int padding);

/// Winning flat input index for every output element.
using ArgmaxMap = std::vector<std::uint32_t>;

template <typename T>
struct PoolResult {
    Tensor<T> output;
    ArgmaxMap argmax;
};

/// 2x2 max-pool with stride 2. Ties go to the first element in row-major order.
template <typename T>
PoolResult<T> maxpool2(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& grad_out, const ArgmaxMap& argmax,
                            const Shape& input_shape);

/// Bilinear resampling with half-pixel centres: output pixel o samples source
/// coordinate (o + 0.5) * in / out - 0.5, clamped to the border.
template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& input, int out_h, int out_w);

/// Exact adjoint of bilinear_resize.
template <typename T>
Tensor<T> bilinear_resize_backward(const Tensor<T>& grad_out, const Shape& input_shape);

template <typename T>
Tensor<T> bilinear_up2(const Tensor<T>& input) {
    return bilinear_resize(input, input.shape().h * 2, input.shape().w * 2);
}

template <typename T>
Tensor<T> bilinear_up2_backward(const Tensor<T>& grad_out, const Shape& input_shape) {
    return bilinear_resize_backward(grad_out, input_shape);
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

/// Passes gradient where input > 0; the subgradient at 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// Mean of squared differences, accumulated in double.
template <typename T>
double mean_squared_error(const Tensor<T>& a, const Tensor<T>& b);

/// Gradient of mean_squared_error w.r.t. `a`, scaled by `upstream`.
template <typename T>
Tensor<T> mean_squared_error_backward(const Tensor<T>& a, const Tensor<T>& b, T upstream);

/// Reflect-pads H and W at the bottom/right edge (mirror without repeating the edge).
template <typename T>
Tensor<T> reflect_pad(const Tensor<T>& input, int out_h, int out_w);

/// Top-left crop.
template <typename T>
Tensor<T> crop(const Tensor<T>& input, int top, int left, int h, int w);

} // namespace oucd::ops
