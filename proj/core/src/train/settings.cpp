#include "oucd/train/settings.hpp"

#include <charconv>
#include <iomanip>
#include <sstream>

#include "oucd/common/error.hpp"

namespace oucd {
namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

} // namespace

std::vector<LrStep> parse_lr_schedule(const std::string& text) {
    std::vector<LrStep> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("lr schedule entry '" + item + "' is not <epoch>:<lr>");
        }
        LrStep step;
        const std::string e = trim(item.substr(0, colon));
        const std::string l = trim(item.substr(colon + 1));
        const auto [pe, ee] = std::from_chars(e.data(), e.data() + e.size(), step.epoch);
        const auto [pl, el] = std::from_chars(l.data(), l.data() + l.size(), step.lr);
        if (ee != std::errc{} || el != std::errc{} || pe != e.data() + e.size() ||
            pl != l.data() + l.size()) {
            throw ConfigError("lr schedule entry '" + item + "' is not <epoch>:<lr>");
        }
        out.push_back(step);
    }
    if (out.empty()) {
        throw ConfigError("lr schedule is empty");
    }
    return out;
}

std::string format_lr_schedule(const std::vector<LrStep>& schedule) {
    std::string out;
    for (const auto& s : schedule) {
        out += (out.empty() ? "" : ",") + std::to_string(s.epoch) + ":" + fmt(s.lr);
    }
    return out;
}

TrainConfig TrainConfig::defaults(const std::string& preset) {
    TrainConfig c;
    c.model = preset_model(preset, Variant::oucd);
    c.patch_size = preset == "canonical" ? 128 : 32;
    return c;
}

void TrainConfig::validate() const {
    model.validate();
    loss.validate();
    if (batch_size < 1) {
        throw ConfigError("train.batch_size must be >= 1");
    }
    if (patch_size < 32 || patch_size % 32 != 0) {
        throw ConfigError("train.patch_size must be a positive multiple of 32");
    }
    if (patch_size % model.required_divisor() != 0) {
        throw ConfigError("train.patch_size is not divisible by the model's input divisor");
    }
    if (total_epochs < 0 || max_steps < 0) {
        throw ConfigError("train.epochs and train.max_steps must be non-negative");
    }
    if (lr_schedule.empty() || lr_schedule.front().epoch != 0) {
        throw ConfigError("train.lr_schedule must start at epoch 0");
    }
    for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
        if (!(lr_schedule[i].lr > 0.0)) {
            throw ConfigError("train.lr_schedule learning rates must be positive");
        }
        if (i > 0 && lr_schedule[i].epoch <= lr_schedule[i - 1].epoch) {
            throw ConfigError("train.lr_schedule epochs must be strictly increasing");
        }
    }
    if (!(grad_clip >= 0.0)) {
        throw ConfigError("train.grad_clip must be non-negative");
    }
}

double TrainConfig::lr_at(int epoch) const {
    double lr = lr_schedule.front().lr;
    for (const auto& s : lr_schedule) {
        if (epoch >= s.epoch) {
            lr = s.lr;
        }
    }
    return lr;
}

TrainConfig TrainConfig::from_config(const ConfigFile& cfg) {
    TrainConfig c = defaults(cfg.get_string("model.preset", "small"));
    c.model = ModelConfig::from_config(cfg);
    c.batch_size = static_cast<int>(cfg.get_int("train.batch_size", c.batch_size));
    c.patch_size = static_cast<int>(cfg.get_int("train.patch_size", c.patch_size));
    if (const auto s = cfg.get("train.lr_schedule")) {
        c.lr_schedule = parse_lr_schedule(*s);
    }
    c.total_epochs = static_cast<int>(cfg.get_int("train.epochs", c.total_epochs));
    c.max_steps = cfg.get_int("train.max_steps", c.max_steps);
    c.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", static_cast<long long>(c.seed)));
    c.grad_clip = cfg.get_double("train.grad_clip", c.grad_clip);
    c.extractor_weights = cfg.get_string("loss.extractor_weights", "");
    c.loss.lambda = cfg.get_double("loss.lambda", c.loss.lambda);
    c.loss.perceptual_layers = cfg.get_int_list("loss.perceptual_layers", c.loss.perceptual_layers);
    c.validate();
    return c;
}

ConfigFile TrainConfig::to_config() const {
    ConfigFile cfg = model.to_config();
    cfg.set("train.batch_size", std::to_string(batch_size));
    cfg.set("train.patch_size", std::to_string(patch_size));
    cfg.set("train.lr_schedule", format_lr_schedule(lr_schedule));
    cfg.set("train.epochs", std::to_string(total_epochs));
    cfg.set("train.max_steps", std::to_string(max_steps));
    cfg.set("train.seed", std::to_string(seed));
    cfg.set("train.grad_clip", fmt(grad_clip));
    cfg.set("loss.lambda", fmt(loss.lambda));
    std::string taps;
    for (const int t : loss.perceptual_layers) {
        taps += (taps.empty() ? "" : ",") + std::to_string(t);
    }
    cfg.set("loss.perceptual_layers", taps);
    cfg.set("loss.extractor_weights", extractor_weights.string());
    return cfg;
}

const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "model.preset",       "model.variant",        "model.in_channels",
        "model.out_channels", "model.kernel",         "model.padding",
        "model.oc_encoder",   "model.oc_decoder",     "model.uc_encoder",
        "model.uc_decoder",   "train.batch_size",     "train.patch_size",
        "train.lr_schedule",  "train.epochs",         "train.max_steps",
        "train.seed",         "train.grad_clip",      "loss.lambda",
        "loss.perceptual_layers", "loss.extractor_weights", "rain.streak_count",
        "rain.angle_deg",     "rain.length_px",       "rain.width_px",
        "rain.intensity",     "rain.blur_sigma",      "data.split_fractions",
        "eval.timing_repetitions"};
    return keys;
}

} // namespace oucd
