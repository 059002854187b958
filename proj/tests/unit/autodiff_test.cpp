#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "oucd/common/error.hpp"
#include "oucd/model/network.hpp"
#include "oucd/tensor/adam.hpp"
#include "oucd/tensor/gradcheck.hpp"

using namespace oucd;
using oracle::random_tensor;

TEST(Tape, SumOfLeafHasUnitGradient) {
    Tape<float> tape;
    const Var x = tape.input(random_tensor<float>({1, 2, 3, 3}, 1));
    tape.backward(tape.sum(x));
    for (float g : tape.grad(x).data()) EXPECT_EQ(g, 1.0F);
}

TEST(Tape, ReuseAccumulatesGradient) {
    Tape<float> tape;
    const Var x = tape.input(random_tensor<float>({1, 2, 3, 3}, 2));
    tape.backward(tape.sum(tape.add(x, x)));
    for (float g : tape.grad(x).data()) EXPECT_EQ(g, 2.0F);
}

TEST(Tape, RejectsNonScalarLossAndEmptyTape) {
    Tape<float> empty;
    EXPECT_THROW(empty.backward(Var{0}), ContractError);
    Tape<float> tape;
    const Var x = tape.input(Tensor<float>(Shape{1, 1, 2, 2}, 1.0F));
    EXPECT_THROW(tape.backward(x), ContractError);
}

TEST(Tape, ParameterGradientLandsOnTensor) {
    Tensor<float> w(Shape{1, 1, 1, 1}, 3.0F);
    Tensor<float> b(Shape{1, 1, 1, 1}, 0.0F);
    Tape<float> tape;
    const Var x = tape.constant(Tensor<float>(Shape{1, 1, 2, 2}, 2.0F));
    const Var y = tape.conv2d(x, tape.parameter(w), tape.parameter(b), 1, 0);
    tape.backward(tape.sum(y));
    EXPECT_FLOAT_EQ(w.grad()[0], 8.0F);
    EXPECT_FLOAT_EQ(b.grad()[0], 4.0F);
}

TEST(Adam, ZeroGradientKeepsParameter) {
    Tensor<float> p(Shape{1, 1, 1, 3}, 0.5F);
    AdamState<float> st(3);
    const std::vector<float> g(3, 0.0F);
    adam_step<float>(p, g, st, 0.1F);
    for (float v : p.data()) EXPECT_EQ(v, 0.5F);
    EXPECT_EQ(st.step_count, 1U);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Tensor<double> p(Shape{}, 0.0);
    AdamState<double> st(1);
    const std::vector<double> g{1.0};
    adam_step<double>(p, g, st, 0.1);
    // m = 0.1, v = 0.001; m_hat = 1, v_hat = 1 -> step = 0.1 / (1 + 1e-8).
    EXPECT_NEAR(p.data()[0], -0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, SecondIdenticalStepIsSmallerThanLr) {
    Tensor<double> p(Shape{}, 0.0);
    AdamState<double> st(1);
    const std::vector<double> g{1.0};
    adam_step<double>(p, g, st, 0.1);
    const double first = p.data()[0];
    adam_step<double>(p, g, st, 0.1);
    const double second = p.data()[0] - first;
    EXPECT_EQ(st.step_count, 2U);
    // Hand recurrence: m = 0.19, v = 0.001999; corrections 0.19 / 0.19, 0.001999 / 0.001999.
    const double m_hat = 0.19 / (1 - 0.81), v_hat = 0.001999 / (1 - 0.998001);
    EXPECT_NEAR(second, -0.1 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-12);
    EXPECT_LT(std::abs(second), 0.1);
}

TEST(RelativeError, FloorsTinyEntries) {
    EXPECT_DOUBLE_EQ(relative_error(1.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-5), 1e-5 / 1e-3);
    EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-3, 1.0), 1e-3 / kScaleFloor);
}

TEST(GradCheck, PrimitiveSuitePassesBothPrecisions) {
    GradCheckOptions opt;
    opt.cases = 20;
    for (Precision p : {Precision::single, Precision::shadow}) {
        const auto report = run_gradcheck("all", p, opt);
        EXPECT_TRUE(report.passed()) << report.to_table();
        EXPECT_GE(report.rows.size(), gradcheck_op_names().size());
    }
}

TEST(GradCheck, ConvSmallCasePassesAtDefaultTolerance) {
    GradCheckOptions opt;
    opt.cases = 10;
    const auto report = run_gradcheck("conv2d", Precision::single, opt);
    ASSERT_FALSE(report.rows.empty());
    for (const auto& row : report.rows) {
        EXPECT_EQ(row.op, "conv2d");
        EXPECT_LT(row.max_rel_error, 1e-2);
    }
}

TEST(GradCheck, ReluAndPoolPassAtTightTolerance) {
    GradCheckOptions opt;
    opt.cases = 20;
    opt.tolerance = 1e-3;
    EXPECT_TRUE(run_gradcheck("relu", Precision::shadow, opt).passed());
    EXPECT_TRUE(run_gradcheck("maxpool2", Precision::shadow, opt).passed());
}

TEST(GradCheck, UnknownOpIsUsageError) {
    EXPECT_THROW(run_gradcheck("softmax", Precision::single, {}), UsageError);
}

TEST(GradCheck, CustomScaleOpPasses) {
    const std::vector<std::string> names{"x"};
    OpUnderTest<double> op = [](Tape<double>& t, std::span<const Var> v) { return t.scale(v[0], 2.0); };
    CaseGenerator<double> gen = [](Rng& rng) {
        std::uniform_real_distribution<double> d(-1, 1);
        Tensor<double> x(Shape{1, 1, 2, 2});
        for (auto& e : x.data()) e = d(rng);
        return std::vector<Tensor<double>>{x};
    };
    GradCheckOptions opt;
    opt.cases = 5;
    const auto ok = gradient_check<double>("scale", names, op, gen, opt);
    EXPECT_TRUE(ok.passed());
}

namespace {

ModelConfig narrow_model() {
    ModelConfig m = small_model();
    m.preset = "custom";
    m.overcomplete = overcomplete_branch({3, 4, 5});
    m.undercomplete = undercomplete_branch({3, 4, 4, 5, 5});
    return m;
}

} // namespace

TEST(NetworkGradient, EveryParameterMatchesShadowFiniteDifferences) {
    const ModelConfig cfg = narrow_model();
    Network<float> net(cfg, 5);
    // Zero biases put whole dead regions exactly on a ReLU kink, where central
    // differences average the two one-sided slopes.
    std::mt19937_64 jitter(7);
    std::uniform_real_distribution<float> bias(-0.05F, 0.05F);
    for (auto& p : net.parameters()) {
        if (p.name.ends_with(".bias")) {
            for (auto& v : p.tensor->data()) v = bias(jitter);
        }
    }
    Network<double> shadow(cfg, 5);
    shadow.copy_parameters_from(net);

    const auto y = random_tensor<float>({1, 3, 32, 32}, 9, 0.0, 1.0);
    const auto x = random_tensor<float>({1, 3, 32, 32}, 10, 0.0, 1.0);
    Tape<float> tape;
    const auto fwd = net.forward(tape, tape.constant(y));
    tape.backward(tape.mse(fwd.output, tape.constant(x)));

    const auto y64 = y.cast<double>();
    const auto x64 = x.cast<double>();
    auto loss64 = [&] { return ops::mean_squared_error(shadow.infer(y64), x64); };

    std::mt19937_64 rng(3);
    auto params = net.parameters();
    auto sparams = shadow.parameters();
    ASSERT_EQ(params.size(), sparams.size());
    double worst = 0.0;
    std::string worst_name;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto analytic = params[p].tensor->grad();
        auto& target = *sparams[p].tensor;
        std::uniform_int_distribution<std::size_t> pick(0, target.size() - 1);
        std::vector<std::pair<double, double>> pairs;
        double scale = 0.0;
        for (int k = 0; k < 10; ++k) {
            const std::size_t i = pick(rng);
            const double keep = target.data()[i];
            const double h = 1e-6;
            target.data()[i] = keep + h;
            const double hi = loss64();
            target.data()[i] = keep - h;
            const double lo = loss64();
            target.data()[i] = keep;
            const double num = (hi - lo) / (2 * h);
            pairs.emplace_back(analytic[i], num);
            scale = std::max(scale, std::abs(num));
        }
        for (auto [a, n] : pairs) {
            const double e = relative_error(a, n, scale);
            if (e > worst) {
                worst = e;
                worst_name = params[p].name;
            }
        }
    }
    EXPECT_LT(worst, 1e-2) << worst_name;
}
