// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   oucd_acceptance [--only 2,3,8]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "oucd/common/error.hpp"
#include "oucd/common/runtime.hpp"
#include "oucd/metrics/extractor.hpp"
#include "oucd/metrics/loss.hpp"
#include "oucd/metrics/quality.hpp"
#include "oucd/model/network.hpp"
#include "oucd/model/receptive_field.hpp"
#include "oucd/model/trace.hpp"
#include "oucd/tensor/gradcheck.hpp"
#include "oucd/train/ablation.hpp"
#include "oucd/train/checkpoint.hpp"
#include "oucd/train/evaluate.hpp"
#include "oucd/train/trainer.hpp"

using namespace oucd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- 1 ------------------------------------------------------------------------

Outcome gradient_integrity() {
    const auto t0 = Clock::now();
    GradCheckOptions opt;
    opt.cases = 100;
    GradCheckReport report;
    double worst_single = 0.0;
    double worst_shadow = 0.0;
    for (const Precision p : {Precision::single, Precision::shadow}) {
        opt.tolerance = p == Precision::single ? 1e-2 : 1e-5;
        const auto r = run_gradcheck("all", p, opt);
        for (const auto& row : r.rows) {
            double& w = p == Precision::single ? worst_single : worst_shadow;
            w = std::max(w, row.max_rel_error);
        }
        report.append(r);
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = report.passed() && secs < 120.0;
    o.detail = std::to_string(report.rows.size()) + " rows, worst single " +
               fmt("%.2e", worst_single) + ", worst shadow " + fmt("%.2e", worst_shadow) +
               ", " + fmt("%.1f", secs) + " s";
    if (!report.passed()) {
        o.detail += "\n" + report.to_table();
    }
    return o;
}

// ---- 2 ------------------------------------------------------------------------

// Expected (layer, C, H, W) per table line at H = W = 32.
struct Row {
    std::string layer;
    int c, h;
};

std::vector<Row> overcomplete_rows() {
    return {{"Conv", 32, 32},  {"Upsampling", 32, 64},   {"ReLU", 32, 64},
            {"Conv", 64, 64},  {"Upsampling", 64, 128},  {"ReLU", 64, 128},
            {"Conv", 128, 128}, {"Upsampling", 128, 256}, {"ReLU", 128, 256},
            {"Conv", 128, 256}, {"MaxPooling", 128, 128}, {"ReLU", 128, 128},
            {"Conv", 64, 128},  {"MaxPooling", 64, 64},   {"ReLU", 64, 64},
            {"Conv", 32, 64},   {"MaxPooling", 32, 32},   {"ReLU", 32, 32}};
}

std::vector<Row> undercomplete_rows() {
    return {{"Conv", 32, 32},  {"MaxPooling", 32, 16}, {"ReLU", 32, 16},
            {"Conv", 64, 16},  {"MaxPooling", 64, 8},  {"ReLU", 64, 8},
            {"Conv", 128, 8},  {"MaxPooling", 128, 4}, {"ReLU", 128, 4},
            {"Conv", 256, 4},  {"MaxPooling", 256, 2}, {"ReLU", 256, 2},
            {"Conv", 512, 2},  {"MaxPooling", 512, 1}, {"ReLU", 512, 1},
            {"Conv", 512, 1},  {"Upsampling", 512, 2}, {"ReLU", 512, 2},
            {"Conv", 256, 2},  {"Upsampling", 256, 4}, {"ReLU", 256, 4},
            {"Conv", 128, 4},  {"Upsampling", 128, 8}, {"ReLU", 128, 8},
            {"Conv", 64, 8},   {"Upsampling", 64, 16}, {"ReLU", 64, 16},
            {"Conv", 32, 16},  {"Upsampling", 32, 32}, {"ReLU", 32, 32}};
}

int compare_rows(const std::vector<TraceRow>& got, const std::vector<Row>& want,
                 const std::string& branch, std::string& why) {
    int matched = 0;
    if (got.size() != want.size()) {
        why += branch + ": " + std::to_string(got.size()) + " rows, expected " +
               std::to_string(want.size()) + "; ";
    }
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
        const Shape expected{1, want[i].c, want[i].h, want[i].h};
        if (got[i].layer.rfind(want[i].layer, 0) == 0 && got[i].output == expected) {
            ++matched;
        } else if (why.size() < 400) {
            why += branch + " row " + std::to_string(i + 1) + ": " + got[i].layer + " " +
                   size_label(got[i].output) + ", expected " + want[i].layer + " " +
                   size_label(expected) + "; ";
        }
    }
    return matched;
}

Outcome architecture_conformance() {
    Network<float> net(canonical_model(), 0);
    Trace trace;
    const Tensor<float> y = net.infer(oracle::random_tensor<float>({1, 3, 32, 32}, 2, 0.0, 1.0),
                                      &trace);
    std::string why;
    const auto oc = overcomplete_rows();
    const auto uc = undercomplete_rows();
    const int m = compare_rows(trace.table_rows("Overcomplete"), oc, "overcomplete", why) +
                  compare_rows(trace.table_rows("Undercomplete"), uc, "undercomplete", why);
    const int total = static_cast<int>(oc.size() + uc.size());
    if (y.shape() != Shape{1, 3, 32, 32}) {
        why += "network output " + y.shape().str();
    }
    return {why.empty() && m == total,
            std::to_string(m) + "/" + std::to_string(total) + " table rows match" +
                (why.empty() ? "" : "; " + why)};
}

// ---- 3 ------------------------------------------------------------------------

Outcome receptive_fields() {
    const auto rows = receptive_field_table(3, 3);
    const std::vector<double> uc{3, 6, 12}, oc{3, 1.5, 0.75};
    bool ok = rows.size() == 3;
    std::ostringstream os;
    os << "undercomplete";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ok = ok && rows[i].undercomplete == uc[i];
        os << " " << rows[i].undercomplete;
    }
    os << ", overcomplete";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ok = ok && rows[i].overcomplete == oc[i];
        os << " " << rows[i].overcomplete;
    }
    return {ok, os.str()};
}

// ---- 4 ------------------------------------------------------------------------

Outcome parameter_census() {
    const std::size_t n = param_count(canonical_model());
    const std::size_t hand = oracle::network_params({32, 64, 128}, {32, 64, 128, 256, 512}, true,
                                                    true, true);
    const bool in_window = n >= 10'000'000 && n <= 12'000'000;
    std::string d = "canonical parameters " + std::to_string(n) + " (hand sum " +
                    std::to_string(hand) + "), required window [1.0e7, 1.2e7]";
    if (n != hand) {
        d += "; count disagrees with the hand sum";
    }
    return {in_window && n == hand, d};
}

// ---- 5 ------------------------------------------------------------------------

// Learning rate per epoch (2 steps each): 1e-3, then 3e-4 from step 1000 and
// 1e-4 from step 1600.
struct OverfitSetup {
    int steps = 2000;
    const char* schedule = "0:1e-3,500:3e-4,800:1e-4";
};

double train_mse(const Network<float>& net, const std::vector<ImagePair>& pairs) {
    double s = 0.0;
    for (const auto& p : pairs) {
        s += ops::mean_squared_error(clamp_unit(net.infer(p.rainy)), p.clean);
    }
    return s / static_cast<double>(pairs.size());
}

double moving_average(const std::vector<StepLog>& h, std::size_t end, std::size_t window) {
    double s = 0.0;
    for (std::size_t i = end - window; i < end; ++i) {
        s += h[i].loss;
    }
    return s / static_cast<double>(window);
}

Outcome overfit_convergence() {
    const OverfitSetup setup;
    TrainConfig cfg = fixture::quick_config(setup.steps);
    cfg.lr_schedule = parse_lr_schedule(setup.schedule);
    cfg.seed = 0;
    const auto pairs = fixture::pairs(4, 32, 0);

    const auto t0 = Clock::now();
    Trainer trainer(cfg, pairs);
    trainer.run();
    const double secs = seconds_since(t0);

    const auto& h = trainer.history();
    const double mse = train_mse(trainer.network(), pairs);
    const double psnr_db = evaluate(trainer.network(), pairs, "train").mean_psnr;
    const double ma100 = moving_average(h, 100, 100);
    const double ma_end = moving_average(h, h.size(), 100);
    const bool ok = static_cast<int>(h.size()) == setup.steps && mse < 1e-3 && psnr_db > 30.0 &&
                    secs < 15 * 60.0 && ma_end < ma100;
    return {ok, std::to_string(h.size()) + " steps (lr " + setup.schedule + ")" +
                    ", training MSE " + fmt("%.3e", mse) + ", PSNR " + fmt("%.2f", psnr_db) +
                    " dB, loss MA100 " + fmt("%.3e", ma100) + " -> " + fmt("%.3e", ma_end) +
                    ", " + fmt("%.0f", secs) + " s"};
}

// ---- 6 ------------------------------------------------------------------------

Outcome derain_efficacy() {
    TrainConfig cfg = fixture::quick_config(1500);
    cfg.lr_schedule = {{0, 1e-3}};
    cfg.seed = 0;
    const auto train = fixture::pairs(32, 64, 6);
    const auto held_out = fixture::pairs(50, 64, 60);

    const auto t0 = Clock::now();
    Trainer trainer(cfg, train);
    trainer.run();
    const auto model = evaluate(trainer.network(), held_out, "held-out");
    const auto identity = evaluate_identity(held_out, "held-out");
    const double gain = model.mean_psnr - identity.mean_psnr;
    return {gain >= 3.0, "held-out mean PSNR " + fmt("%.2f", model.mean_psnr) + " dB vs identity " +
                             fmt("%.2f", identity.mean_psnr) + " dB (gain " + fmt("%.2f", gain) +
                             " dB), " + fmt("%.0f", seconds_since(t0)) + " s"};
}

// ---- 7 ------------------------------------------------------------------------

Outcome ablation_structure() {
    TrainConfig cfg = fixture::quick_config(20);
    const auto rep = run_ablation(cfg, fixture::pairs(4, 32, 7), fixture::pairs(4, 32, 70));
    std::string why;
    const auto& order = ablation_order();
    if (rep.rows.size() != 4) {
        why += std::to_string(rep.rows.size()) + " rows; ";
    }
    for (std::size_t i = 0; i < std::min(rep.rows.size(), order.size()); ++i) {
        const auto& r = rep.rows[i];
        if (r.variant != order[i] || r.label != ablation_label(order[i])) {
            why += "row " + std::to_string(i + 1) + " is " + r.label + "; ";
        }
        if (r.parameters != param_count([&] {
                ModelConfig m = cfg.model;
                m.variant = order[i];
                return m;
            }()) ||
            r.report.images.size() != 4 || !std::isfinite(r.report.mean_psnr)) {
            why += "row " + std::to_string(i + 1) + " incomplete; ";
        }
    }

    // Same seed and inputs, with and without the fusion blocks.
    ModelConfig with = small_model(Variant::oucd);
    ModelConfig without = small_model(Variant::oucd_no_msff);
    const auto y = oracle::random_tensor<float>({1, 3, 32, 32}, 71, 0.0, 1.0);
    const bool outputs_differ =
        !bitwise_equal(Network<float>(with, 3).infer(y), Network<float>(without, 3).infer(y));
    const bool reports_differ = rep.rows.size() == 4 &&
                                rep.rows[3].report.mean_psnr != rep.rows[2].report.mean_psnr;
    if (!outputs_differ || !reports_differ) {
        why += "with/without fusion indistinguishable; ";
    }
    std::string d = "rows:";
    for (const auto& r : rep.rows) {
        d += " " + r.label + " " + fmt("%.2f", r.report.mean_psnr) + " dB;";
    }
    return {why.empty(), d + (why.empty() ? "" : " problems: " + why)};
}

// ---- 8 ------------------------------------------------------------------------

Outcome metric_oracles() {
    double worst_psnr = 0.0;
    double worst_ssim = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto a = oracle::random_tensor<float>({1, 3, 24, 29}, 800 + i, 0.0, 1.0);
        auto b = a;
        const auto noise = oracle::random_tensor<float>(a.shape(), 900 + i, -0.25, 0.25);
        for (std::size_t k = 0; k < b.size(); ++k) {
            b.data()[k] = std::clamp(b.data()[k] + noise.data()[k], 0.0F, 1.0F);
        }
        worst_psnr = std::max(worst_psnr, std::abs(psnr(a, b) - oracle::psnr(a, b)));
        worst_ssim = std::max(worst_ssim, std::abs(ssim(a, b) - oracle::ssim(a, b)));
    }
    const auto a = oracle::random_tensor<float>({1, 3, 16, 16}, 1, 0.0, 1.0);
    const bool sentinels = std::isinf(psnr(a, a)) && psnr(a, a) > 0 && ssim(a, a) == 1.0;
    return {worst_psnr < 1e-6 && worst_ssim < 1e-6 && sentinels,
            "max |PSNR - reference| " + fmt("%.1e", worst_psnr) + ", max |SSIM - reference| " +
                fmt("%.1e", worst_ssim) + ", sentinels " + (sentinels ? "ok" : "wrong")};
}

// ---- 9 ------------------------------------------------------------------------

std::string checkpoint_error(const std::vector<std::uint8_t>& bytes) {
    try {
        (void)deserialize_checkpoint(bytes, "corrupt");
    } catch (const CheckpointError& e) {
        return e.what();
    }
    return "";
}

Outcome determinism_and_persistence() {
    auto run = [] {
        TrainConfig cfg = fixture::quick_config(100);
        cfg.seed = 9;
        Trainer t(cfg, fixture::pairs(4, 32, 9));
        t.run();
        return serialize_checkpoint(t.checkpoint());
    };
    const auto a = run();
    const auto b = run();
    std::string why;
    if (a != b) {
        why += "same-seed runs differ; ";
    }

    oracle::TempDir dir("acceptance");
    save_checkpoint(deserialize_checkpoint(a), dir / "a.oucd");
    if (oracle::read_bytes(dir / "a.oucd") != a) {
        why += "file round trip changed bytes; ";
    }

    auto bad = a;
    bad[0] = 'X';
    const bool magic = checkpoint_error(bad).find("magic") != std::string::npos;
    bad = a;
    bad[4] = 2;
    const bool version = checkpoint_error(bad).find("version") != std::string::npos;
    bad.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2));
    const std::string trunc = checkpoint_error(bad);
    const bool truncated = trunc.find("truncated") != std::string::npos &&
                           trunc.find("record") != std::string::npos;
    if (!magic || !version || !truncated) {
        why += "corruption not reported as a checkpoint error; ";
    }
    return {why.empty(), std::to_string(a.size()) + "-byte checkpoints, runs " +
                             (a == b ? "bit-identical" : "DIFFERENT") + ", truncation: \"" + trunc +
                             "\"" + (why.empty() ? "" : "; " + why)};
}

// ---- 10 -----------------------------------------------------------------------

Outcome loss_contract() {
    const auto ex = FeatureExtractor<float>::seeded();
    bool exact = true;
    bool positive = true;
    double smallest = INFINITY;
    for (int i = 0; i < 20; ++i) {
        const auto x = oracle::random_tensor<float>({1, 3, 32, 32}, 1000 + i, 0.0, 1.0);
        auto xh = x;
        xh.data()[static_cast<std::size_t>(i * 37) % xh.size()] += 0.01F * static_cast<float>(i + 1);
        Tape<float> tape(false);
        const Var a = tape.constant(xh);
        const Var b = tape.constant(x);
        LossConfig zero;
        zero.lambda = 0.0;
        const auto t0 = total_loss(tape, a, b, ex, zero);
        exact = exact && bitwise_equal(tape.value(t0.total), tape.value(mse_loss(tape, a, b)));
        LossConfig def;
        def.lambda = 0.04;
        const auto t1 = total_loss(tape, a, b, ex, def);
        const double extra = static_cast<double>(tape.value(t1.total).data()[0]) -
                             tape.value(t1.mse).data()[0];
        positive = positive && t1.has_perceptual && extra > 0.0;
        smallest = std::min(smallest, extra);
    }
    return {exact && positive, std::string("lambda=0 ") + (exact ? "bit-equal to MSE" : "DIFFERS") +
                                   ", smallest perceptual contribution at 0.04: " +
                                   fmt("%.3e", smallest)};
}

} // namespace

int main(int argc, char** argv) {
    tune_allocator();
    CLI::App app{"Acceptance criteria 1-10"};
    std::vector<int> only;
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
        {1, {"gradient integrity", gradient_integrity}},
        {2, {"architecture conformance", architecture_conformance}},
        {3, {"receptive-field formulas", receptive_fields}},
        {4, {"parameter census", parameter_census}},
        {5, {"overfit convergence", overfit_convergence}},
        {6, {"derain efficacy", derain_efficacy}},
        {7, {"ablation structure", ablation_structure}},
        {8, {"metric oracles", metric_oracles}},
        {9, {"determinism and persistence", determinism_and_persistence}},
        {10, {"loss contract", loss_contract}},
    };

    int failed = 0;
    for (const auto& [id, entry] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) {
            continue;
        }
        Outcome o;
        try {
            o = entry.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %2d %-28s %s  %s\n", id, entry.first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
