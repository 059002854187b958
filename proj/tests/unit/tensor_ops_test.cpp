#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "oucd/common/error.hpp"
#include "oucd/tensor/ops.hpp"

using namespace oucd;
using oracle::random_tensor;

namespace {

template <typename T>
Tensor<T> ones(Shape s) {
    return Tensor<T>(s, T{1});
}

} // namespace

TEST(Conv2d, AllOnesKernelCountsNeighbours) {
    const auto out = ops::conv2d(ones<float>({1, 1, 3, 3}), ones<float>({1, 1, 3, 3}),
                                 Tensor<float>(Shape{1, 1, 1, 1}), 1, 1);
    EXPECT_FLOAT_EQ(out.at(0, 0, 1, 1), 9.0F);
    EXPECT_FLOAT_EQ(out.at(0, 0, 0, 0), 4.0F);
    EXPECT_FLOAT_EQ(out.at(0, 0, 2, 2), 4.0F);
    EXPECT_FLOAT_EQ(out.at(0, 0, 0, 1), 6.0F);
    EXPECT_FLOAT_EQ(out.at(0, 0, 1, 2), 6.0F);
}

TEST(Conv2d, IdentityPointwiseConvCopiesInput) {
    const auto x = random_tensor<float>({2, 4, 5, 6}, 11);
    Tensor<float> w(Shape{4, 4, 1, 1});
    for (int c = 0; c < 4; ++c) w.at(c, c, 0, 0) = 1.0F;
    const auto out = ops::conv2d(x, w, Tensor<float>(Shape{4, 1, 1, 1}), 1, 0);
    EXPECT_TRUE(bitwise_equal(out, x));
}

TEST(Conv2d, MatchesDirectLoopOracle) {
    const auto x = random_tensor<double>({2, 4, 8, 8}, 1);
    const auto w = random_tensor<double>({8, 4, 3, 3}, 2);
    const auto b = random_tensor<double>({8, 1, 1, 1}, 3);
    const auto want = oracle::conv2d(x, w, b, 1, 1);
    const auto got =
        ops::conv2d(x.cast<float>(), w.cast<float>(), b.cast<float>(), 1, 1);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_NEAR(got.data()[i], want.data()[i], 1e-5) << i;
    }
}

TEST(Conv2d, StridedAndUnpaddedMatchOracle) {
    const auto x = random_tensor<double>({1, 3, 9, 7}, 4);
    const auto w = random_tensor<double>({5, 3, 3, 3}, 5);
    const auto b = random_tensor<double>({5, 1, 1, 1}, 6);
    for (int stride : {1, 2}) {
        for (int pad : {0, 1, 2}) {
            const auto want = oracle::conv2d(x, w, b, stride, pad);
            const auto got = ops::conv2d(x, w, b, stride, pad);
            ASSERT_EQ(got.shape(), want.shape());
            for (std::size_t i = 0; i < got.size(); ++i) {
                ASSERT_NEAR(got.data()[i], want.data()[i], 1e-12);
            }
        }
    }
}

TEST(Conv2d, WideImageUsesSeveralTilesConsistently) {
    // 3 x 300: several output rows per tile and a ragged last tile.
    const auto x = random_tensor<double>({1, 2, 40, 300}, 7);
    const auto w = random_tensor<double>({3, 2, 3, 3}, 8);
    const auto b = random_tensor<double>({3, 1, 1, 1}, 9);
    const auto want = oracle::conv2d(x, w, b, 1, 1);
    const auto got = ops::conv2d(x, w, b, 1, 1);
    for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_NEAR(got.data()[i], want.data()[i], 1e-12);
    }
}

TEST(Conv2d, RejectsChannelMismatchAndEmptyOutput) {
    EXPECT_THROW(ops::conv2d(ones<float>({1, 2, 4, 4}), ones<float>({1, 3, 3, 3}),
                             Tensor<float>(Shape{1, 1, 1, 1}), 1, 1),
                 ConfigError);
    EXPECT_THROW(ops::conv2d(ones<float>({1, 1, 2, 2}), ones<float>({1, 1, 3, 3}),
                             Tensor<float>(Shape{1, 1, 1, 1}), 1, 0),
                 ConfigError);
}

TEST(Conv2dBackward, ZeroUpstreamGivesZeroGradients) {
    const auto x = random_tensor<float>({1, 2, 5, 5}, 1);
    const auto w = random_tensor<float>({3, 2, 3, 3}, 2);
    const auto g = ops::conv2d_backward(Tensor<float>(Shape{1, 3, 5, 5}), x, w, 1, 1);
    for (const auto* t : {&g.input, &g.weight, &g.bias}) {
        for (float v : t->data()) EXPECT_EQ(v, 0.0F);
    }
}

TEST(Conv2dBackward, SinglePixelStampsKernel) {
    Tensor<float> w(Shape{1, 1, 3, 3});
    for (int i = 0; i < 9; ++i) w.data()[i] = static_cast<float>(i + 1);
    Tensor<float> g(Shape{1, 1, 5, 5});
    g.at(0, 0, 2, 2) = 1.0F;
    const auto grads = ops::conv2d_backward(g, Tensor<float>(Shape{1, 1, 5, 5}), w, 1, 1);
    // Input (2 + dy - 1, 2 + dx - 1) saw weight (dy, dx).
    for (int dy = 0; dy < 3; ++dy)
        for (int dx = 0; dx < 3; ++dx)
            EXPECT_FLOAT_EQ(grads.input.at(0, 0, 1 + dy, 1 + dx), w.at(0, 0, dy, dx));
    EXPECT_FLOAT_EQ(grads.input.at(0, 0, 0, 0), 0.0F);
    EXPECT_FLOAT_EQ(grads.bias.data()[0], 1.0F);
}

TEST(Conv2dBackward, MatchesFiniteDifferences) {
    const auto x = random_tensor<double>({2, 2, 6, 6}, 21);
    const auto w = random_tensor<double>({3, 2, 3, 3}, 22);
    const auto b = random_tensor<double>({3, 1, 1, 1}, 23);
    auto total = [](const Tensor<double>& t) {
        double s = 0;
        for (double v : t.data()) s += v;
        return s;
    };
    const auto grads = ops::conv2d_backward(Tensor<double>(Shape{2, 3, 6, 6}, 1.0), x, w, 1, 1);
    const auto dx = oracle::numeric_gradient(
        [&](const Tensor<double>& v) { return total(oracle::conv2d(v, w, b, 1, 1)); }, x);
    const auto dw = oracle::numeric_gradient(
        [&](const Tensor<double>& v) { return total(oracle::conv2d(x, v, b, 1, 1)); }, w);
    const auto db = oracle::numeric_gradient(
        [&](const Tensor<double>& v) { return total(oracle::conv2d(x, w, v, 1, 1)); }, b);
    for (std::size_t i = 0; i < dx.size(); ++i) EXPECT_NEAR(grads.input.data()[i], dx[i], 1e-6);
    for (std::size_t i = 0; i < dw.size(); ++i) EXPECT_NEAR(grads.weight.data()[i], dw[i], 1e-6);
    for (std::size_t i = 0; i < db.size(); ++i) EXPECT_NEAR(grads.bias.data()[i], db[i], 1e-6);
}

TEST(MaxPool, PicksWindowMaximum) {
    Tensor<float> x(Shape{1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4});
    const auto r = ops::maxpool2(x);
    EXPECT_FLOAT_EQ(r.output.data()[0], 4.0F);
    EXPECT_EQ(r.argmax[0], 3U);
}

TEST(MaxPool, ConstantStaysConstant) {
    const auto r = ops::maxpool2(Tensor<float>(Shape{1, 2, 4, 6}, 0.25F));
    for (float v : r.output.data()) EXPECT_EQ(v, 0.25F);
}

TEST(MaxPool, MatchesBruteForce) {
    const auto x = random_tensor<double>({1, 2, 8, 8}, 31);
    const auto want = oracle::maxpool2(x);
    const auto got = ops::maxpool2(x);
    ASSERT_EQ(got.output.shape(), want.shape());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got.output.data()[i], want.data()[i]);
}

TEST(MaxPool, OddSizeIsConfigError) {
    EXPECT_THROW(ops::maxpool2(Tensor<float>(Shape{1, 1, 3, 4})), ConfigError);
}

TEST(MaxPoolBackward, IncreasingInputRoutesToBottomRight) {
    Tensor<float> x(Shape{1, 1, 4, 4});
    for (int i = 0; i < 16; ++i) x.data()[i] = static_cast<float>(i);
    const auto r = ops::maxpool2(x);
    const auto g = ops::maxpool2_backward(Tensor<float>(Shape{1, 1, 2, 2}, 1.0F), r.argmax, x.shape());
    for (int y = 0; y < 4; ++y)
        for (int xx = 0; xx < 4; ++xx)
            EXPECT_EQ(g.at(0, 0, y, xx), (y % 2 == 1 && xx % 2 == 1) ? 1.0F : 0.0F);
}

TEST(MaxPoolBackward, TiesGoToFirstIndex) {
    const Tensor<float> x(Shape{1, 1, 2, 2}, 5.0F);
    const auto r = ops::maxpool2(x);
    const auto g = ops::maxpool2_backward(Tensor<float>(Shape{1, 1, 1, 1}, 1.0F), r.argmax, x.shape());
    EXPECT_EQ(g.data()[0], 1.0F);
    EXPECT_EQ(g.data()[1] + g.data()[2] + g.data()[3], 0.0F);
}

TEST(MaxPoolBackward, MatchesFiniteDifferencesAwayFromTies) {
    const auto x = random_tensor<double>({1, 2, 6, 6}, 41);
    const auto r = ops::maxpool2(x);
    const auto g = ops::maxpool2_backward(Tensor<double>(Shape{1, 2, 3, 3}, 1.0), r.argmax, x.shape());
    const auto num = oracle::numeric_gradient(
        [](const Tensor<double>& v) {
            double s = 0;
            const auto pooled = oracle::maxpool2(v);
            for (double e : pooled.data()) s += e;
            return s;
        },
        x, 1e-7);
    for (std::size_t i = 0; i < num.size(); ++i) EXPECT_NEAR(g.data()[i], num[i], 1e-6);
}

TEST(Bilinear, ConstantStaysConstant) {
    const auto out = ops::bilinear_up2(Tensor<float>(Shape{1, 2, 3, 5}, 0.7F));
    for (float v : out.data()) EXPECT_NEAR(v, 0.7F, 1e-7);
}

TEST(Bilinear, TwoPixelRow) {
    Tensor<double> x(Shape{1, 1, 1, 2}, std::vector<double>{2.0, 6.0});
    const auto out = ops::bilinear_up2(x);
    ASSERT_EQ(out.shape(), (Shape{1, 1, 2, 4}));
    const double a = 2, b = 6;
    const double want[] = {a, 0.75 * a + 0.25 * b, 0.25 * a + 0.75 * b, b};
    for (int r = 0; r < 2; ++r)
        for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out.at(0, 0, r, i), want[i]);
}

TEST(Bilinear, MatchesPerPixelOracle) {
    const auto x = random_tensor<double>({1, 3, 5, 7}, 51);
    for (auto [oh, ow] : {std::pair{10, 14}, std::pair{5, 7}, std::pair{3, 2}, std::pair{1, 1}}) {
        const auto want = oracle::bilinear(x, oh, ow);
        const auto got = ops::bilinear_resize(x.cast<float>(), oh, ow);
        for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.data()[i], want.data()[i], 1e-6);
    }
}

TEST(BilinearBackward, ZeroUpstreamGivesZero) {
    const auto g = ops::bilinear_up2_backward(Tensor<float>(Shape{1, 1, 4, 6}), Shape{1, 1, 2, 3});
    for (float v : g.data()) EXPECT_EQ(v, 0.0F);
}

TEST(BilinearBackward, IsTransposeOfForwardMatrix) {
    // Build the 1-D forward matrix column by column and compare with the adjoint.
    const Shape in{1, 1, 1, 2};
    Tensor<double> g(Shape{1, 1, 2, 4});
    for (int i = 0; i < 8; ++i) g.data()[i] = i + 1.0;
    const auto back = ops::bilinear_up2_backward(g, in);
    for (int col = 0; col < 2; ++col) {
        Tensor<double> e(in);
        e.data()[col] = 1.0;
        const auto fwd = ops::bilinear_up2(e);
        double dot = 0;
        for (int i = 0; i < 8; ++i) dot += fwd.data()[i] * g.data()[i];
        EXPECT_NEAR(back.data()[col], dot, 1e-12);
    }
}

TEST(BilinearBackward, MatchesFiniteDifferences) {
    const auto x = random_tensor<double>({1, 2, 3, 4}, 61);
    const auto r = random_tensor<double>({1, 2, 6, 8}, 62);
    const auto g = ops::bilinear_up2_backward(r, x.shape());
    const auto num = oracle::numeric_gradient(
        [&](const Tensor<double>& v) {
            const auto o = oracle::bilinear(v, 6, 8);
            double s = 0;
            for (std::size_t i = 0; i < o.size(); ++i) s += o.data()[i] * r.data()[i];
            return s;
        },
        x);
    for (std::size_t i = 0; i < num.size(); ++i) {
        EXPECT_LT(std::abs(g.data()[i] - num[i]) / std::max(std::abs(num[i]), 1e-3), 1e-4);
    }
}

TEST(Relu, ClampsNegatives) {
    Tensor<float> x(Shape{1, 1, 1, 3}, std::vector<float>{-1, 0, 2});
    const auto y = ops::relu(x);
    EXPECT_EQ(y.data()[0], 0.0F);
    EXPECT_EQ(y.data()[1], 0.0F);
    EXPECT_EQ(y.data()[2], 2.0F);
    const auto g = ops::relu_backward(Tensor<float>(Shape{1, 1, 1, 3}, 5.0F), x);
    EXPECT_EQ(g.data()[0], 0.0F);
    EXPECT_EQ(g.data()[1], 0.0F);
    EXPECT_EQ(g.data()[2], 5.0F);
}

TEST(Add, IdentityAndDoubling) {
    const auto a = random_tensor<float>({1, 2, 3, 3}, 71);
    EXPECT_TRUE(bitwise_equal(ops::add(a, Tensor<float>(a.shape())), a));
    const auto d = ops::add(a, a);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(d.data()[i], 2 * a.data()[i]);
    EXPECT_THROW(ops::add(a, Tensor<float>(Shape{1, 2, 3, 4})), ContractError);
}

TEST(ReflectPad, MirrorsWithoutRepeatingEdge) {
    Tensor<float> x(Shape{1, 1, 1, 3}, std::vector<float>{1, 2, 3});
    const auto p = ops::reflect_pad(x, 1, 5);
    const float want[] = {1, 2, 3, 2, 1};
    for (int i = 0; i < 5; ++i) EXPECT_EQ(p.data()[i], want[i]);
    const auto c = ops::crop(p, 0, 0, 1, 3);
    EXPECT_TRUE(bitwise_equal(c, x));
}
