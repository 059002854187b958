#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "oracles.hpp"
#include "oucd/common/error.hpp"
#include "oucd/metrics/extractor.hpp"
#include "oucd/metrics/loss.hpp"
#include "oucd/metrics/quality.hpp"
#include "oucd/metrics/report.hpp"

using namespace oucd;
using oracle::random_tensor;

TEST(Psnr, Sentinels) {
    const auto a = random_tensor<float>({1, 3, 8, 8}, 1, 0.0, 1.0);
    EXPECT_TRUE(std::isinf(psnr(a, a)));
    EXPECT_DOUBLE_EQ(psnr(Tensor<float>(Shape{1, 3, 4, 4}), Tensor<float>(Shape{1, 3, 4, 4}, 1.0F)),
                     0.0);
    EXPECT_NEAR(psnr(Tensor<float>(Shape{1, 1, 4, 4}), Tensor<float>(Shape{1, 1, 4, 4}, 0.1F)),
                20.0, 1e-5);
    EXPECT_THROW((void)psnr(a, a, 0.0), UsageError);
    EXPECT_THROW((void)psnr(a, Tensor<float>(Shape{1, 3, 8, 9})), ContractError);
}

TEST(Psnr, MatchesReferenceOnRandomPairs) {
    for (int i = 0; i < 20; ++i) {
        const auto a = random_tensor<float>({1, 3, 16, 20}, 100 + i, 0.0, 1.0);
        const auto b = random_tensor<float>({1, 3, 16, 20}, 200 + i, 0.0, 1.0);
        EXPECT_NEAR(psnr(a, b), oracle::psnr(a, b), 1e-6);
    }
}

TEST(Ssim, IdentityIsOne) {
    const auto a = random_tensor<float>({2, 3, 16, 16}, 3, 0.0, 1.0);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, InvertedCheckerboardIsNegative) {
    Tensor<float> a(Shape{1, 1, 16, 16});
    Tensor<float> b(Shape{1, 1, 16, 16});
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            a.at(0, 0, y, x) = static_cast<float>((x + y) % 2);
            b.at(0, 0, y, x) = 1.0F - a.at(0, 0, y, x);
        }
    const double s = ssim(a, b);
    EXPECT_LT(s, 0.0);
    EXPECT_NEAR(s, oracle::ssim(a, b), 1e-6);
}

TEST(Ssim, MatchesReferenceOnRandomPairs) {
    for (int i = 0; i < 20; ++i) {
        const auto a = random_tensor<float>({1, 3, 13, 17}, 300 + i, 0.0, 1.0);
        auto b = a;
        const auto noise = random_tensor<float>(a.shape(), 400 + i, -0.2, 0.2);
        for (std::size_t k = 0; k < b.size(); ++k) b.data()[k] += noise.data()[k];
        EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-6);
    }
}

TEST(Ssim, TooSmallIsUsageError) {
    EXPECT_THROW((void)ssim(Tensor<float>(Shape{1, 1, 10, 20}), Tensor<float>(Shape{1, 1, 10, 20})),
                 UsageError);
}

TEST(Ssim, GaussianTapsAreNormalized) {
    const auto taps = ssim_gaussian_taps();
    ASSERT_EQ(taps.size(), 11U);
    double s = 0;
    for (double t : taps) s += t;
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(taps[0], taps[10]);
}

TEST(MseLoss, Arithmetic) {
    Tape<float> tape;
    const auto x = random_tensor<float>({1, 3, 8, 8}, 5, 0.0, 0.8);
    auto shifted = x;
    for (auto& v : shifted.data()) v += 0.1F;
    const Var a = tape.constant(x);
    EXPECT_EQ(tape.value(mse_loss(tape, a, a)).data()[0], 0.0F);
    EXPECT_NEAR(tape.value(mse_loss(tape, tape.constant(shifted), a)).data()[0], 0.01, 1e-6);
}

TEST(PerceptualLoss, ZeroForIdenticalAndPositiveOtherwise) {
    const auto ex = FeatureExtractor<float>::seeded();
    const auto x = random_tensor<float>({1, 3, 16, 16}, 6, 0.0, 1.0);
    auto y = x;
    y.data()[10] += 0.05F;
    Tape<float> tape;
    const Var vx = tape.constant(x);
    EXPECT_EQ(tape.value(perceptual_loss(tape, ex, vx, vx, {0, 1, 2})).data()[0], 0.0F);
    EXPECT_GT(tape.value(perceptual_loss(tape, ex, tape.constant(y), vx, {0, 1, 2})).data()[0], 0.0F);
}

TEST(TotalLoss, LambdaZeroIsMseExactly) {
    const auto ex = FeatureExtractor<float>::seeded();
    LossConfig cfg;
    cfg.lambda = 0.0;
    Tape<float> tape;
    const Var a = tape.constant(random_tensor<float>({1, 3, 16, 16}, 7, 0.0, 1.0));
    const Var b = tape.constant(random_tensor<float>({1, 3, 16, 16}, 8, 0.0, 1.0));
    const auto terms = total_loss(tape, a, b, ex, cfg);
    EXPECT_FALSE(terms.has_perceptual);
    EXPECT_TRUE(bitwise_equal(tape.value(terms.total), tape.value(mse_loss(tape, a, b))));
}

TEST(TotalLoss, DefaultLambdaAddsWeightedPerceptual) {
    const auto ex = FeatureExtractor<float>::seeded();
    LossConfig cfg;
    Tape<float> tape;
    const Var a = tape.constant(random_tensor<float>({1, 3, 16, 16}, 9, 0.0, 1.0));
    const Var b = tape.constant(random_tensor<float>({1, 3, 16, 16}, 10, 0.0, 1.0));
    const auto t = total_loss(tape, a, b, ex, cfg);
    ASSERT_TRUE(t.has_perceptual);
    const double total = tape.value(t.total).data()[0];
    const double mse = tape.value(t.mse).data()[0];
    const double perc = tape.value(t.perceptual).data()[0];
    EXPECT_GT(perc, 0.0);
    EXPECT_NEAR(total, mse + 0.04 * perc, 1e-6);
}

TEST(LossConfig, RejectsBadValues) {
    LossConfig c;
    c.lambda = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = LossConfig{};
    c.perceptual_layers = {3};
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Extractor, SameSeedSameFeatures) {
    const auto a = FeatureExtractor<float>::seeded(5);
    const auto b = FeatureExtractor<float>::seeded(5);
    const auto x = random_tensor<float>({1, 3, 16, 16}, 11, 0.0, 1.0);
    Tape<float> ta(false), tb(false);
    const auto fa = a.forward(ta, ta.constant(x));
    const auto fb = b.forward(tb, tb.constant(x));
    ASSERT_EQ(fa.size(), 3U);
    EXPECT_EQ(ta.value(fa[0]).shape(), (Shape{1, 16, 16, 16}));
    EXPECT_EQ(ta.value(fa[1]).shape(), (Shape{1, 32, 8, 8}));
    EXPECT_EQ(ta.value(fa[2]).shape(), (Shape{1, 64, 4, 4}));
    for (std::size_t i = 0; i < fa.size(); ++i) {
        EXPECT_TRUE(bitwise_equal(ta.value(fa[i]), tb.value(fb[i])));
    }
}

TEST(Extractor, WeightsNeverReceiveGradients) {
    const auto ex = FeatureExtractor<float>::seeded();
    Tape<float> tape;
    const Var x = tape.input(random_tensor<float>({1, 3, 8, 8}, 12, 0.0, 1.0));
    tape.backward(tape.sum(ex.forward(tape, x)[2]));
    for (const auto& l : ex.layers()) {
        EXPECT_FALSE(l.weight.has_grad());
    }
    EXPECT_EQ(tape.grad(x).shape(), (Shape{1, 3, 8, 8}));
}

TEST(Extractor, FileRoundTripAndMalformedFile) {
    oracle::TempDir dir("ex");
    const auto a = FeatureExtractor<float>::seeded(17);
    a.save(dir / "w.oucd");
    const auto b = FeatureExtractor<float>::from_file(dir / "w.oucd");
    for (std::size_t i = 0; i < a.layers().size(); ++i) {
        EXPECT_TRUE(bitwise_equal(a.layers()[i].weight, b.layers()[i].weight));
    }
    std::ofstream(dir / "bad.oucd") << "not a weight file";
    EXPECT_THROW((void)FeatureExtractor<float>::from_file(dir / "bad.oucd"), IoError);
    EXPECT_THROW((void)FeatureExtractor<float>::from_file(dir / "none.oucd"), IoError);
}

TEST(Report, TextCapsInfinityAndJsonUsesNull) {
    MetricReport r;
    r.dataset = "set";
    r.images = {{"a", INFINITY, 1.0, 0.5}, {"b", 20.0, 0.5, 0.25}};
    r.finalize();
    EXPECT_TRUE(std::isinf(r.mean_psnr));
    EXPECT_NEAR(r.mean_ssim, 0.75, 1e-12);
    EXPECT_NE(r.to_text().find("99.00"), std::string::npos);
    const auto j = nlohmann::json::parse(r.to_json());
    EXPECT_TRUE(j["images"][0]["psnr_db"].is_null());
    EXPECT_DOUBLE_EQ(j["images"][1]["psnr_db"].get<double>(), 20.0);
}
