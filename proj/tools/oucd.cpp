// oucd: command-line driver for synthesis, training, inference, evaluation,
// ablation, receptive-field reports, gradient checks and feature dumps.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oucd/common/config_file.hpp"
#include "oucd/common/error.hpp"
#include "oucd/common/rng.hpp"
#include "oucd/common/runtime.hpp"
#include "oucd/data/image_io.hpp"
#include "oucd/data/manifest.hpp"
#include "oucd/data/rain.hpp"
#include "oucd/data/scene.hpp"
#include "oucd/model/feature_dump.hpp"
#include "oucd/model/network.hpp"
#include "oucd/model/receptive_field.hpp"
#include "oucd/model/trace.hpp"
#include "oucd/tensor/gradcheck.hpp"
#include "oucd/train/ablation.hpp"
#include "oucd/train/checkpoint.hpp"
#include "oucd/train/evaluate.hpp"
#include "oucd/train/settings.hpp"
#include "oucd/train/timing.hpp"
#include "oucd/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace oucd;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kIntegrity = 3 };

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App& cmd, Common& c, bool output_required) {
    cmd.add_option("-c,--config", c.config_path, "Config file (INI sections per module)")
        ->check(CLI::ExistingFile);
    cmd.add_option("-s,--set", c.overrides, "Override as section.key=value (repeatable)");
    auto* out = cmd.add_option("-o,--output-dir", c.output_dir, "Directory for every output file");
    if (output_required) {
        out->required();
    }
    cmd.add_option("--seed", c.seed, "Root seed for all randomness");
}

// File config, then overrides, then --seed. Unknown keys fail before any work.
ConfigFile effective_config(const Common& c) {
    ConfigFile cfg;
    if (!c.config_path.empty()) {
        cfg = ConfigFile::load(c.config_path);
        cfg.require_known_keys(known_config_keys());
    }
    cfg.apply_overrides(c.overrides, known_config_keys());
    if (c.seed) {
        cfg.set("train.seed", std::to_string(*c.seed));
    }
    return cfg;
}

std::uint64_t root_seed(const ConfigFile& cfg) {
    return static_cast<std::uint64_t>(cfg.get_int("train.seed", 0));
}

fs::path prepare_output(const Common& c, const ConfigFile& cfg) {
    const fs::path out(c.output_dir);
    fs::create_directories(out);
    cfg.save(out / "effective_config.ini");
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) {
        throw IoError(path.string() + ": cannot write");
    }
}

std::vector<fs::path> png_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ImagePair> load_split(const std::string& data, const std::string& split) {
    if (data.empty()) {
        throw UsageError("--data is required");
    }
    const fs::path path = manifest_path(data, split);
    if (!fs::exists(path)) {
        throw UsageError(path.string() + ": manifest not found");
    }
    auto pairs = load_pairs(read_manifest(path));
    if (pairs.empty()) {
        throw UsageError(path.string() + ": manifest lists no images");
    }
    return pairs;
}

std::array<double, 3> split_fractions(const ConfigFile& cfg) {
    const auto f = cfg.get_double_list("data.split_fractions", {0.8, 0.1, 0.1});
    if (f.size() != 3) {
        throw UsageError("data.split_fractions needs three values");
    }
    return {f[0], f[1], f[2]};
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
    Common common;
    std::string clean_dir;
    std::string params_path;
    int generate = 0;
    int size = 64;
};

int cmd_synth(const SynthArgs& a) {
    if (a.clean_dir.empty() && a.generate <= 0) {
        throw UsageError("synth needs --clean-dir or --generate-clean N");
    }
    ConfigFile cfg = effective_config(a.common);
    if (!a.params_path.empty()) {
        ConfigFile params = ConfigFile::load(a.params_path);
        params.require_known_keys(known_config_keys());
        params.merge(cfg);
        cfg = params;
    }
    RainParams rain = RainParams::from_config(cfg);
    rain.to_config(cfg);
    const std::uint64_t seed = root_seed(cfg);
    const fs::path out = prepare_output(a.common, cfg);
    fs::create_directories(out / "rainy");
    fs::create_directories(out / "clean");

    std::vector<std::pair<std::string, Tensor<float>>> cleans;
    if (a.generate > 0) {
        if (a.size < 32 || a.size % 32 != 0) {
            throw UsageError("--size must be a positive multiple of 32");
        }
        for (int i = 0; i < a.generate; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "scene_%05d", i);
            cleans.emplace_back(name, generate_scene(a.size, a.size,
                                                     derive_seed(seed, std::string("scene:") + name)));
        }
    } else {
        if (!fs::is_directory(a.clean_dir)) {
            throw UsageError(a.clean_dir + ": clean directory does not exist");
        }
        for (const auto& p : png_files(a.clean_dir)) {
            cleans.emplace_back(p.stem().string(), load_image(p));
        }
        if (cleans.empty()) {
            throw UsageError(a.clean_dir + ": no PNG images");
        }
    }
    for (const auto& [name, clean] : cleans) {
        RainParams p = rain;
        p.seed = derive_seed(seed, "rain:" + name);
        const RainPair pair = synthesize_pair(clean, p);
        save_image(pair.clean, out / "clean" / (name + ".png"));
        save_image(pair.rainy, out / "rainy" / (name + ".png"));
    }
    const auto manifests = build_manifest(out, split_fractions(cfg), seed);
    std::cout << "wrote " << cleans.size() << " pairs to " << out.string() << " (train "
              << manifests[0].entries.size() << ", val " << manifests[1].entries.size()
              << ", test " << manifests[2].entries.size() << ")\n";
    return kOk;
}

// ---- train ------------------------------------------------------------------

struct DataArgs {
    Common common;
    std::string data;
    std::string split = "test";
    std::string checkpoint;
};

int cmd_train(const DataArgs& a) {
    ConfigFile cfg = effective_config(a.common);
    const TrainConfig tc = TrainConfig::from_config(cfg);
    cfg.merge(tc.to_config());
    auto pairs = load_split(a.data, "train");
    const fs::path out = prepare_output(a.common, cfg);
    std::ofstream log(out / "train.log");
    Trainer trainer(tc, std::move(pairs));
    trainer.run(&log, out / "diagnostics");
    save_checkpoint(trainer.checkpoint(), out / "checkpoint.oucd");
    const auto& h = trainer.history();
    std::cout << "trained " << trainer.steps_done() << " steps";
    if (!h.empty()) {
        std::cout << ", final loss " << h.back().loss;
    }
    std::cout << "; checkpoint " << (out / "checkpoint.oucd").string() << "\n";
    return kOk;
}

// ---- infer ------------------------------------------------------------------

struct InferArgs {
    Common common;
    std::string checkpoint;
    std::string input;
    bool trace = false;
};

int cmd_infer(const InferArgs& a) {
    const ConfigFile cfg = effective_config(a.common);
    const Network<float> net = network_from_checkpoint(load_checkpoint(a.checkpoint));
    std::vector<fs::path> inputs;
    if (fs::is_directory(a.input)) {
        inputs = png_files(a.input);
    } else if (fs::is_regular_file(a.input)) {
        inputs.push_back(a.input);
    } else {
        throw UsageError(a.input + ": no such file or directory");
    }
    if (inputs.empty()) {
        throw UsageError(a.input + ": no PNG images");
    }
    const fs::path out = prepare_output(a.common, cfg);
    for (const auto& p : inputs) {
        const Tensor<float> y = load_image(p);
        save_image(clamp_unit(infer_padded(net, y)), out / p.filename());
    }
    if (a.trace) {
        const Shape& s = load_image(inputs.front()).shape();
        const int div = net.config().required_divisor();
        Tensor<float> probe(Shape{1, 3, (s.h + div - 1) / div * div, (s.w + div - 1) / div * div});
        Trace trace;
        static_cast<void>(net.infer(probe, &trace));
        write_text(out / "trace.txt", trace.to_table());
    }
    std::cout << "derained " << inputs.size() << " image(s) into " << out.string() << "\n";
    return kOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    DataArgs d;
    bool save_predictions = false;
    int timing_size = 0;
    std::optional<int> timing_reps;
};

int cmd_eval(const EvalArgs& a) {
    const ConfigFile cfg = effective_config(a.d.common);
    const CheckpointBundle bundle = load_checkpoint(a.d.checkpoint);
    if (!a.d.common.config_path.empty() || cfg.contains("model.preset")) {
        const ModelConfig expected = ModelConfig::from_config(cfg);
        if (expected.fingerprint() != bundle.fingerprint) {
            throw CheckpointError(a.d.checkpoint +
                                  ": architecture fingerprint does not match the configured model");
        }
    }
    const Network<float> net = network_from_checkpoint(bundle);
    const auto pairs = load_split(a.d.data, a.d.split);
    const fs::path out = prepare_output(a.d.common, cfg);
    const MetricReport report =
        evaluate(net, pairs, a.d.data + ":" + a.d.split,
                 a.save_predictions ? out / "predictions" : fs::path());
    const MetricReport baseline = evaluate_identity(pairs, a.d.data + ":" + a.d.split);
    write_text(out / "report.txt", report.to_text());
    write_text(out / "report.json", report.to_json());
    write_text(out / "identity_baseline.txt", baseline.to_text());
    std::cout << report.to_text();
    std::cout << "identity baseline mean PSNR: " << std::min(baseline.mean_psnr, kPsnrTextCap)
              << " dB\n";
    if (a.timing_size > 0) {
        const int reps = a.timing_reps.value_or(
            static_cast<int>(cfg.get_int("eval.timing_repetitions", 10)));
        if (reps < 1) {
            throw UsageError("timing repetitions must be positive");
        }
        const TimingReport t = timing_report(net, a.timing_size, reps);
        write_text(out / "timing.txt", t.to_text());
        std::cout << t.to_text();
    }
    return kOk;
}

// ---- ablate -----------------------------------------------------------------

int cmd_ablate(const DataArgs& a) {
    ConfigFile cfg = effective_config(a.common);
    const TrainConfig tc = TrainConfig::from_config(cfg);
    cfg.merge(tc.to_config());
    const auto train = load_split(a.data, "train");
    const auto test = load_split(a.data, a.split);
    const fs::path out = prepare_output(a.common, cfg);
    std::ofstream log(out / "ablation.log");
    const AblationReport report = run_ablation(tc, train, test, &log);
    write_text(out / "ablation.txt", report.to_text());
    write_text(out / "ablation.json", report.to_json());
    std::cout << report.to_text();
    return kOk;
}

// ---- rf-report ----------------------------------------------------------------

struct RfArgs {
    Common common;
    int kernel = 3;
    int max_layer = 5;
};

int cmd_rf(const RfArgs& a) {
    const ConfigFile cfg = effective_config(a.common);
    if (a.kernel <= 0) {
        throw UsageError("--kernel must be positive");
    }
    if (a.max_layer <= 0) {
        throw UsageError("--max-layer must be positive");
    }
    const std::string table = format_rf_table(a.kernel, receptive_field_table(a.kernel, a.max_layer));
    std::cout << table;
    if (!a.common.output_dir.empty()) {
        const fs::path out = prepare_output(a.common, cfg);
        write_text(out / "rf_report.txt", table);
    }
    return kOk;
}

// ---- gradcheck ----------------------------------------------------------------

struct GradArgs {
    Common common;
    std::string ops = "all";
    double tolerance = 0.0;
    std::string precision = "both";
    int cases = 100;
};

int cmd_gradcheck(const GradArgs& a) {
    const ConfigFile cfg = effective_config(a.common);
    std::vector<Precision> precisions;
    if (a.precision == "single" || a.precision == "both") {
        precisions.push_back(Precision::single);
    }
    if (a.precision == "shadow" || a.precision == "both") {
        precisions.push_back(Precision::shadow);
    }
    if (precisions.empty()) {
        throw UsageError("--precision must be single, shadow or both");
    }
    if (a.cases < 1) {
        throw UsageError("--cases must be positive");
    }
    GradCheckOptions opt;
    opt.cases = a.cases;
    opt.tolerance = a.tolerance;
    opt.seed = a.common.seed.value_or(0);
    GradCheckReport report;
    for (const Precision p : precisions) {
        report.append(run_gradcheck(a.ops, p, opt));
    }
    std::cout << report.to_table();
    if (!a.common.output_dir.empty()) {
        const fs::path out = prepare_output(a.common, cfg);
        write_text(out / "gradcheck.txt", report.to_table());
    }
    std::cout << (report.passed() ? "all gradient checks passed\n" : "gradient check FAILED\n");
    return report.passed() ? kOk : kInternal;
}

// ---- dump-features -------------------------------------------------------------

struct DumpArgs {
    Common common;
    std::string checkpoint;
    std::string input;
    std::string layers = "oc.enc.*";
};

int cmd_dump(const DumpArgs& a) {
    const ConfigFile cfg = effective_config(a.common);
    std::optional<Network<float>> net;
    if (!a.checkpoint.empty()) {
        net.emplace(network_from_checkpoint(load_checkpoint(a.checkpoint)));
    } else {
        net.emplace(ModelConfig::from_config(cfg), derive_seed(root_seed(cfg), "init"));
    }
    const Tensor<float> y = load_image(a.input);
    const fs::path out = prepare_output(a.common, cfg);
    const DumpResult r = dump_feature_maps(*net, y, a.layers, out / "features");
    for (const auto& flat : r.flat_maps) {
        std::cerr << "warning: " << flat << " has zero variance; written as all zeros\n";
    }
    std::cout << "wrote " << r.files.size() << " feature maps to " << (out / "features").string()
              << "\n";
    return kOk;
}

template <typename F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kIntegrity;
    } catch (const IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kIntegrity;
    } catch (const InputValidationError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kIntegrity;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

} // namespace

int main(int argc, char** argv) {
    oucd::tune_allocator();
    CLI::App app{"Over-and-under complete deraining toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "oucd 0.1.0");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Add synthetic rain to clean images and write manifests");
    add_common(*s, synth.common, true);
    s->add_option("--clean-dir", synth.clean_dir, "Directory of clean RGB PNGs");
    s->add_option("--params", synth.params_path, "Config file with a [rain] section")
        ->check(CLI::ExistingFile);
    s->add_option("--generate-clean", synth.generate, "Generate N procedural clean scenes instead");
    s->add_option("--size", synth.size, "Side length of generated scenes");

    DataArgs train;
    auto* t = app.add_subcommand("train", "Train a network on a dataset's train split");
    add_common(*t, train.common, true);
    t->add_option("--data", train.data, "Dataset directory or manifest")->required();

    InferArgs infer;
    auto* i = app.add_subcommand("infer", "Derain a PNG or a directory of PNGs");
    add_common(*i, infer.common, true);
    i->add_option("--checkpoint", infer.checkpoint, "Checkpoint file")->required();
    i->add_option("--input", infer.input, "Rainy PNG or directory")->required();
    i->add_flag("--trace", infer.trace, "Also write the layer shape table to trace.txt");

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "PSNR/SSIM of a checkpoint on a dataset split");
    add_common(*e, eval.d.common, true);
    e->add_option("--checkpoint", eval.d.checkpoint, "Checkpoint file")->required();
    e->add_option("--data", eval.d.data, "Dataset directory or manifest")->required();
    e->add_option("--split", eval.d.split, "Split to evaluate (train, val, test)");
    e->add_flag("--save-predictions", eval.save_predictions, "Write derained PNGs");
    e->add_option("--timing-size", eval.timing_size, "Also time inference at this square size");
    e->add_option("--timing-repetitions", eval.timing_reps, "Timed passes after 3 warm-ups");

    DataArgs ablate;
    auto* ab = app.add_subcommand("ablate", "Train and evaluate the four architecture variants");
    add_common(*ab, ablate.common, true);
    ab->add_option("--data", ablate.data, "Dataset directory")->required();
    ab->add_option("--split", ablate.split, "Split used for evaluation");

    RfArgs rf;
    auto* r = app.add_subcommand("rf-report", "Receptive-field side length per block");
    add_common(*r, rf.common, false);
    r->add_option("-k,--kernel", rf.kernel, "Base kernel size");
    r->add_option("-L,--max-layer", rf.max_layer, "Deepest block to report");

    GradArgs grad;
    auto* g = app.add_subcommand("gradcheck", "Finite-difference check of every primitive");
    add_common(*g, grad.common, false);
    g->add_option("--ops", grad.ops, "Primitive name or 'all'");
    g->add_option("--tolerance", grad.tolerance, "Relative error bound (default per precision)");
    g->add_option("--precision", grad.precision, "single, shadow or both");
    g->add_option("--cases", grad.cases, "Random cases per primitive");

    DumpArgs dump;
    auto* d = app.add_subcommand("dump-features", "Write intermediate feature maps as PNGs");
    add_common(*d, dump.common, true);
    d->add_option("--checkpoint", dump.checkpoint, "Checkpoint (default: fresh initialization)");
    d->add_option("--input", dump.input, "Input PNG")->required();
    d->add_option("--layers", dump.layers, "Selector such as oc.enc.* or uc.dec.3");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kUsage;
    }

    if (s->parsed()) {
        return guarded([&] { return cmd_synth(synth); });
    }
    if (t->parsed()) {
        return guarded([&] { return cmd_train(train); });
    }
    if (i->parsed()) {
        return guarded([&] { return cmd_infer(infer); });
    }
    if (e->parsed()) {
        return guarded([&] { return cmd_eval(eval); });
    }
    if (ab->parsed()) {
        return guarded([&] { return cmd_ablate(ablate); });
    }
    if (r->parsed()) {
        return guarded([&] { return cmd_rf(rf); });
    }
    if (g->parsed()) {
        return guarded([&] { return cmd_gradcheck(grad); });
    }
    return guarded([&] { return cmd_dump(dump); });
}
