#include "oucd/tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "oucd/common/error.hpp"

namespace oucd::ops {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>>;

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (!(a == b)) {
        throw ContractError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
    }
}

struct ConvGeometry {
    int in_c, in_h, in_w;
    int k, stride, pad;
    int out_h, out_w;

    [[nodiscard]] bool pointwise() const { return k == 1 && stride == 1 && pad == 0; }
    [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(in_c) * k * k; }
    [[nodiscard]] std::size_t cols() const { return static_cast<std::size_t>(out_h) * out_w; }
};

// Unfolds output rows [oy0, oy1) of one sample into a (C*k*k) x ((oy1-oy0)*out_w)
// patch matrix.
template <typename T>
void im2col(const T* src, const ConvGeometry& g, int oy0, int oy1, T* cols) {
    const std::size_t width = static_cast<std::size_t>(oy1 - oy0) * g.out_w;
    for (int c = 0; c < g.in_c; ++c) {
        const T* plane = src + static_cast<std::size_t>(c) * g.in_h * g.in_w;
        for (int ky = 0; ky < g.k; ++ky) {
            for (int kx = 0; kx < g.k; ++kx) {
                T* row = cols + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * width;
                // Output columns whose input column lies inside the image.
                const int lo = std::clamp((g.pad - kx + g.stride - 1) / g.stride, 0, g.out_w);
                const int hi = std::clamp((g.in_w - 1 + g.pad - kx) / g.stride + 1, lo, g.out_w);
                for (int oy = oy0; oy < oy1; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    T* dst = row + static_cast<std::size_t>(oy - oy0) * g.out_w;
                    if (iy < 0 || iy >= g.in_h) {
                        std::fill(dst, dst + g.out_w, T{0});
                        continue;
                    }
                    const T* line = plane + static_cast<std::size_t>(iy) * g.in_w;
                    std::fill(dst, dst + lo, T{0});
                    if (g.stride == 1) {
                        std::copy(line + lo - g.pad + kx, line + hi - g.pad + kx, dst + lo);
                    } else {
                        for (int ox = lo; ox < hi; ++ox) {
                            dst[ox] = line[ox * g.stride - g.pad + kx];
                        }
                    }
                    std::fill(dst + hi, dst + g.out_w, T{0});
                }
            }
        }
    }
}

// Adjoint of im2col: scatters patch-matrix entries back onto the image (accumulating).
template <typename T>
void col2im(const T* cols, const ConvGeometry& g, int oy0, int oy1, T* dst) {
    const std::size_t width = static_cast<std::size_t>(oy1 - oy0) * g.out_w;
    for (int c = 0; c < g.in_c; ++c) {
        T* plane = dst + static_cast<std::size_t>(c) * g.in_h * g.in_w;
        for (int ky = 0; ky < g.k; ++ky) {
            for (int kx = 0; kx < g.k; ++kx) {
                const T* row =
                    cols + ((static_cast<std::size_t>(c) * g.k + ky) * g.k + kx) * width;
                const int lo = std::clamp((g.pad - kx + g.stride - 1) / g.stride, 0, g.out_w);
                const int hi = std::clamp((g.in_w - 1 + g.pad - kx) / g.stride + 1, lo, g.out_w);
                for (int oy = oy0; oy < oy1; ++oy) {
                    const int iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= g.in_h) {
                        continue;
                    }
                    const T* src = row + static_cast<std::size_t>(oy - oy0) * g.out_w;
                    T* line = plane + static_cast<std::size_t>(iy) * g.in_w;
                    for (int ox = lo; ox < hi; ++ox) {
                        line[ox * g.stride - g.pad + kx] += src[ox];
                    }
                }
            }
        }
    }
}

// Output rows per im2col tile: about kTilePixels output pixels, at least one row.
constexpr std::size_t kTilePixels = 512;

int tile_rows(const ConvGeometry& g) {
    return static_cast<int>(std::max<std::size_t>(1, kTilePixels / static_cast<std::size_t>(g.out_w)));
}

// Per-thread scratch reused across calls so large patch matrices are not
// re-faulted on every convolution. Contents are always fully overwritten.
template <typename T>
T* scratch(std::size_t slot, std::size_t count) {
    thread_local std::vector<T> buffers[2];
    auto& b = buffers[slot];
    if (b.size() < count) {
        b.resize(count);
    }
    return b.data();
}

ConvGeometry geometry(const Shape& input, const Shape& weight, int stride, int padding) {
    const Shape out = conv2d_output_shape(input, weight, stride, padding);
    return ConvGeometry{input.c, input.h, input.w, weight.h, stride, padding, out.h, out.w};
}

// Interpolation taps along one axis for the half-pixel convention.
struct Taps {
    std::vector<int> lo, hi;
    std::vector<double> w_lo, w_hi;
};

Taps resize_taps(int in, int out) {
    Taps t;
    t.lo.resize(out);
    t.hi.resize(out);
    t.w_lo.resize(out);
    t.w_hi.resize(out);
    const double scale = static_cast<double>(in) / out;
    for (int o = 0; o < out; ++o) {
        double src = (o + 0.5) * scale - 0.5;
        src = std::max(src, 0.0);
        int i0 = static_cast<int>(src);
        i0 = std::min(i0, in - 1);
        const int i1 = i0 < in - 1 ? i0 + 1 : i0;
        const double frac = src - i0;
        t.lo[o] = i0;
        t.hi[o] = i1;
        t.w_lo[o] = 1.0 - frac;
        t.w_hi[o] = frac;
    }
    return t;
}

int reflect_index(int i, int n) {
    if (n == 1) {
        return 0;
    }
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - i;
}

} // namespace

Shape conv2d_output_shape(const Shape& input, const Shape& weight, int stride, int padding) {
    if (weight.h != weight.w) {
        throw ConfigError("conv2d: only square kernels are supported, got " + weight.str());
    }
    if (input.c != weight.c) {
        throw ConfigError("conv2d: input has " + std::to_string(input.c) +
                          " channels but weight expects " + std::to_string(weight.c));
    }
    if (stride < 1 || padding < 0) {
        throw ConfigError("conv2d: stride must be >= 1 and padding >= 0");
    }
    const int k = weight.h;
    const int num_h = input.h + 2 * padding - k;
    const int num_w = input.w + 2 * padding - k;
    if (num_h < 0 || num_w < 0) {
        throw ConfigError("conv2d: kernel " + std::to_string(k) + " larger than padded input " +
                          input.str());
    }
    return Shape{input.n, weight.n, num_h / stride + 1, num_w / stride + 1};
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 int stride, int padding) {
    const Shape out_shape = conv2d_output_shape(input.shape(), weight.shape(), stride, padding);
    if (bias.size() != static_cast<std::size_t>(weight.shape().n)) {
        throw ConfigError("conv2d: bias length does not match output channels");
    }
    const ConvGeometry g = geometry(input.shape(), weight.shape(), stride, padding);
    Tensor<T> out(out_shape);
    const int out_c = out_shape.c;
    const auto rows = static_cast<Eigen::Index>(g.rows());
    const auto plane = static_cast<Eigen::Index>(g.cols());
    ConstMatrixMap<T> w(weight.data().data(), out_c, rows);
    const int step = tile_rows(g);

    for (int n = 0; n < input.shape().n; ++n) {
        MatrixMap<T> o(out.plane(n, 0), out_c, plane);
        if (g.pointwise()) {
            ConstMatrixMap<T> p(input.plane(n, 0), rows, plane);
            o.noalias() = w * p;
        } else {
            for (int oy0 = 0; oy0 < g.out_h; oy0 += step) {
                const int oy1 = std::min(g.out_h, oy0 + step);
                const auto width = static_cast<Eigen::Index>(oy1 - oy0) * g.out_w;
                T* cols = scratch<T>(0, static_cast<std::size_t>(rows * width));
                im2col(input.plane(n, 0), g, oy0, oy1, cols);
                ConstMatrixMap<T> p(cols, rows, width);
                StridedMap<T> o_tile(out.plane(n, 0) + static_cast<std::size_t>(oy0) * g.out_w,
                                     out_c, width, Eigen::OuterStride<>(plane));
                o_tile.noalias() = w * p;
            }
        }
        for (int c = 0; c < out_c; ++c) {
            o.row(c).array() += bias.data()[c];
        }
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input,
                             const Tensor<T>& weight, int stride, int padding) {
    const Shape expected =
        conv2d_output_shape(cached_input.shape(), weight.shape(), stride, padding);
    require_same_shape(grad_out.shape(), expected, "conv2d_backward");
    const ConvGeometry g = geometry(cached_input.shape(), weight.shape(), stride, padding);
    const int out_c = expected.c;
    const auto rows = static_cast<Eigen::Index>(g.rows());
    const auto plane = static_cast<Eigen::Index>(g.cols());
    const int step = tile_rows(g);

    ConvGrads<T> grads{Tensor<T>(cached_input.shape()), Tensor<T>(weight.shape()),
                       Tensor<T>(Shape{out_c, 1, 1, 1})};
    ConstMatrixMap<T> w(weight.data().data(), out_c, rows);
    MatrixMap<T> dw(grads.weight.data().data(), out_c, rows);

    for (int n = 0; n < cached_input.shape().n; ++n) {
        ConstMatrixMap<T> dy(grad_out.plane(n, 0), out_c, plane);
        for (int c = 0; c < out_c; ++c) {
            // Sequential sum: Eigen's vectorized sum() peels to alignment, so its
            // order (and the bits) would depend on the buffer address.
            const T* row = grad_out.plane(n, c);
            T s{0};
            for (Eigen::Index i = 0; i < plane; ++i) {
                s += row[i];
            }
            grads.bias.data()[c] += s;
        }
        if (g.pointwise()) {
            ConstMatrixMap<T> x(cached_input.plane(n, 0), rows, plane);
            dw.noalias() += dy * x.transpose();
            MatrixMap<T> dx(grads.input.plane(n, 0), rows, plane);
            dx.noalias() = w.transpose() * dy;
            continue;
        }
        for (int oy0 = 0; oy0 < g.out_h; oy0 += step) {
            const int oy1 = std::min(g.out_h, oy0 + step);
            const auto width = static_cast<Eigen::Index>(oy1 - oy0) * g.out_w;
            T* cols = scratch<T>(0, static_cast<std::size_t>(rows * width));
            T* dcols = scratch<T>(1, static_cast<std::size_t>(rows * width));
            ConstStridedMap<T> dy_tile(grad_out.plane(n, 0) + static_cast<std::size_t>(oy0) * g.out_w,
                                       out_c, width, Eigen::OuterStride<>(plane));
            im2col(cached_input.plane(n, 0), g, oy0, oy1, cols);
            ConstMatrixMap<T> x(cols, rows, width);
            dw.noalias() += dy_tile * x.transpose();
            MatrixMap<T> dx(dcols, rows, width);
            dx.noalias() = w.transpose() * dy_tile;
            col2im(dcols, g, oy0, oy1, grads.input.plane(n, 0));
        }
    }
    return grads;
}

template <typename T>
PoolResult<T> maxpool2(const Tensor<T>& input) {
    const Shape& s = input.shape();
    if (s.h % 2 != 0 || s.w % 2 != 0) {
        throw ConfigError("maxpool2: spatial dims must be even, got " + s.str());
    }
    PoolResult<T> result{Tensor<T>(Shape{s.n, s.c, s.h / 2, s.w / 2}), {}};
    result.argmax.resize(result.output.size());
    std::size_t o = 0;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int y = 0; y < s.h / 2; ++y) {
                for (int x = 0; x < s.w / 2; ++x, ++o) {
                    std::size_t best = input.index(n, c, 2 * y, 2 * x);
                    for (const auto& [dy, dx] : {std::pair{0, 1}, {1, 0}, {1, 1}}) {
                        const std::size_t idx = input.index(n, c, 2 * y + dy, 2 * x + dx);
                        if (input.data()[idx] > input.data()[best]) {
                            best = idx;
                        }
                    }
                    result.output.data()[o] = input.data()[best];
                    result.argmax[o] = static_cast<std::uint32_t>(best);
                }
            }
        }
    }
    return result;
}

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& grad_out, const ArgmaxMap& argmax,
                            const Shape& input_shape) {
    const Shape expected{input_shape.n, input_shape.c, input_shape.h / 2, input_shape.w / 2};
    require_same_shape(grad_out.shape(), expected, "maxpool2_backward");
    if (argmax.size() != grad_out.size()) {
        throw ContractError("maxpool2_backward: argmax map does not match grad_out");
    }
    Tensor<T> grad_in(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) {
        grad_in.data()[argmax[i]] += grad_out.data()[i];
    }
    return grad_in;
}

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& input, int out_h, int out_w) {
    const Shape& s = input.shape();
    if (out_h < 1 || out_w < 1) {
        throw ConfigError("bilinear_resize: output size must be positive");
    }
    const Taps ty = resize_taps(s.h, out_h);
    const Taps tx = resize_taps(s.w, out_w);
    Tensor<T> out(Shape{s.n, s.c, out_h, out_w});
    std::vector<T> row(static_cast<std::size_t>(s.w));
    const std::vector<T> wx0(tx.w_lo.begin(), tx.w_lo.end());
    const std::vector<T> wx1(tx.w_hi.begin(), tx.w_hi.end());
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const T* src = input.plane(n, c);
            T* dst = out.plane(n, c);
            for (int y = 0; y < out_h; ++y) {
                const T* r0 = src + static_cast<std::size_t>(ty.lo[y]) * s.w;
                const T* r1 = src + static_cast<std::size_t>(ty.hi[y]) * s.w;
                const T wy0 = static_cast<T>(ty.w_lo[y]);
                const T wy1 = static_cast<T>(ty.w_hi[y]);
                for (int x = 0; x < s.w; ++x) {
                    row[x] = wy0 * r0[x] + wy1 * r1[x];
                }
                T* d = dst + static_cast<std::size_t>(y) * out_w;
                for (int x = 0; x < out_w; ++x) {
                    d[x] = wx0[x] * row[tx.lo[x]] + wx1[x] * row[tx.hi[x]];
                }
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> bilinear_resize_backward(const Tensor<T>& grad_out, const Shape& input_shape) {
    const Shape& g = grad_out.shape();
    if (g.n != input_shape.n || g.c != input_shape.c) {
        throw ContractError("bilinear_resize_backward: shape mismatch " + g.str() + " vs " +
                            input_shape.str());
    }
    const Taps ty = resize_taps(input_shape.h, g.h);
    const Taps tx = resize_taps(input_shape.w, g.w);
    Tensor<T> grad_in(input_shape);
    std::vector<T> row(static_cast<std::size_t>(input_shape.w));
    const std::vector<T> wx0(tx.w_lo.begin(), tx.w_lo.end());
    const std::vector<T> wx1(tx.w_hi.begin(), tx.w_hi.end());
    for (int n = 0; n < g.n; ++n) {
        for (int c = 0; c < g.c; ++c) {
            const T* src = grad_out.plane(n, c);
            T* dst = grad_in.plane(n, c);
            for (int y = 0; y < g.h; ++y) {
                std::fill(row.begin(), row.end(), T{0});
                const T* s_row = src + static_cast<std::size_t>(y) * g.w;
                for (int x = 0; x < g.w; ++x) {
                    row[tx.lo[x]] += wx0[x] * s_row[x];
                    row[tx.hi[x]] += wx1[x] * s_row[x];
                }
                T* r0 = dst + static_cast<std::size_t>(ty.lo[y]) * input_shape.w;
                T* r1 = dst + static_cast<std::size_t>(ty.hi[y]) * input_shape.w;
                const T wy0 = static_cast<T>(ty.w_lo[y]);
                const T wy1 = static_cast<T>(ty.w_hi[y]);
                for (int x = 0; x < input_shape.w; ++x) {
                    r0[x] += wy0 * row[x];
                    r1[x] += wy1 * row[x];
                }
            }
        }
    }
    return grad_in;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
    Tensor<T> out(input.shape());
    std::transform(input.data().begin(), input.data().end(), out.data().begin(),
                   [](T v) { return v > T{0} ? v : T{0}; });
    return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& cached_input) {
    require_same_shape(grad_out.shape(), cached_input.shape(), "relu_backward");
    Tensor<T> grad_in(cached_input.shape());
    for (std::size_t i = 0; i < grad_in.size(); ++i) {
        grad_in.data()[i] = cached_input.data()[i] > T{0} ? grad_out.data()[i] : T{0};
    }
    return grad_in;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a.shape(), b.shape(), "add");
    Tensor<T> out(a.shape());
    std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.data().begin(),
                   [](T x, T y) { return x + y; });
    return out;
}

template <typename T>
double mean_squared_error(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape(a.shape(), b.shape(), "mean_squared_error");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

template <typename T>
Tensor<T> mean_squared_error_backward(const Tensor<T>& a, const Tensor<T>& b, T upstream) {
    require_same_shape(a.shape(), b.shape(), "mean_squared_error_backward");
    Tensor<T> grad(a.shape());
    const T scale = T{2} * upstream / static_cast<T>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        grad.data()[i] = scale * (a.data()[i] - b.data()[i]);
    }
    return grad;
}

template <typename T>
Tensor<T> reflect_pad(const Tensor<T>& input, int out_h, int out_w) {
    const Shape& s = input.shape();
    if (out_h < s.h || out_w < s.w) {
        throw ContractError("reflect_pad: target smaller than input");
    }
    Tensor<T> out(Shape{s.n, s.c, out_h, out_w});
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int y = 0; y < out_h; ++y) {
                const int sy = reflect_index(y, s.h);
                for (int x = 0; x < out_w; ++x) {
                    out.at(n, c, y, x) = input.at(n, c, sy, reflect_index(x, s.w));
                }
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> crop(const Tensor<T>& input, int top, int left, int h, int w) {
    const Shape& s = input.shape();
    if (top < 0 || left < 0 || h < 1 || w < 1 || top + h > s.h || left + w > s.w) {
        throw ContractError("crop window outside tensor " + s.str());
    }
    Tensor<T> out(Shape{s.n, s.c, h, w});
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int y = 0; y < h; ++y) {
                const T* src = input.plane(n, c) + static_cast<std::size_t>(top + y) * s.w + left;
                std::copy(src, src + w, out.plane(n, c) + static_cast<std::size_t>(y) * w);
            }
        }
    }
    return out;
}

#define OUCD_INSTANTIATE_OPS(T)                                                             \
    template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int); \
    template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                          int, int);                                         \
    template PoolResult<T> maxpool2(const Tensor<T>&);                                       \
    template Tensor<T> maxpool2_backward(const Tensor<T>&, const ArgmaxMap&, const Shape&);   \
    template Tensor<T> bilinear_resize(const Tensor<T>&, int, int);                          \
    template Tensor<T> bilinear_resize_backward(const Tensor<T>&, const Shape&);             \
    template Tensor<T> relu(const Tensor<T>&);                                               \
    template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                    \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                              \
    template double mean_squared_error(const Tensor<T>&, const Tensor<T>&);                  \
    template Tensor<T> mean_squared_error_backward(const Tensor<T>&, const Tensor<T>&, T);   \
    template Tensor<T> reflect_pad(const Tensor<T>&, int, int);                              \
    template Tensor<T> crop(const Tensor<T>&, int, int, int, int);

OUCD_INSTANTIATE_OPS(float)
OUCD_INSTANTIATE_OPS(double)

#undef OUCD_INSTANTIATE_OPS

} // namespace oucd::ops
