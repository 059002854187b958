#include "oucd/model/config.hpp"

#include <cmath>
#include <sstream>

#include "oucd/common/error.hpp"
#include "oucd/common/rng.hpp"

namespace oucd {
namespace {

constexpr int kOvercompleteBlocks = 3;
constexpr int kUndercompleteBlocks = 5;

std::string join(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? "," : "") + std::to_string(values[i]);
    }
    return out;
}

std::vector<int> filters_of(const std::vector<BlockSpec>& blocks) {
    std::vector<int> out;
    for (const auto& b : blocks) {
        out.push_back(b.filters);
    }
    return out;
}

std::vector<BlockSpec> blocks(const std::vector<int>& filters, Resample r) {
    std::vector<BlockSpec> out;
    for (const int f : filters) {
        out.push_back(BlockSpec{f, r});
    }
    return out;
}

double factor(Resample r) {
    return r == Resample::upsample2 ? 2.0 : 0.5;
}

// Spatial scale (relative to the network input) after each encoder then decoder block.
struct Scales {
    std::vector<double> encoder, decoder;
};

Scales block_scales(const BranchConfig& b) {
    Scales s;
    double scale = 1.0;
    for (const auto& blk : b.encoder) {
        scale *= factor(blk.resample);
        s.encoder.push_back(scale);
    }
    for (const auto& blk : b.decoder) {
        scale *= factor(blk.resample);
        s.decoder.push_back(scale);
    }
    return s;
}

void validate_branch(const BranchConfig& b, const char* name, std::size_t blocks_expected,
                     Resample enc, Resample dec) {
    const std::string n(name);
    if (b.encoder.size() != blocks_expected || b.decoder.size() != blocks_expected) {
        throw ConfigError(n + " branch needs exactly " + std::to_string(blocks_expected) +
                          " encoder and decoder blocks");
    }
    for (const auto& blk : b.encoder) {
        if (blk.filters < 1) {
            throw ConfigError(n + " encoder filter counts must be positive");
        }
        if (blk.resample != enc) {
            throw ConfigError(n + " encoder blocks use the wrong resampling direction");
        }
    }
    for (const auto& blk : b.decoder) {
        if (blk.filters < 1) {
            throw ConfigError(n + " decoder filter counts must be positive");
        }
        if (blk.resample != dec) {
            throw ConfigError(n + " decoder blocks use the wrong resampling direction");
        }
    }
    const std::size_t count = b.encoder.size();
    for (std::size_t j = 0; j < count; ++j) {
        const int dec_filters = b.decoder[j].filters;
        const int skip_filters = b.encoder[count - 1 - j].filters;
        if (dec_filters != skip_filters) {
            throw ConfigError(n + " decoder block " + std::to_string(j + 1) + " has " +
                              std::to_string(dec_filters) + " filters but its skip source (encoder block " +
                              std::to_string(count - j) + ") has " + std::to_string(skip_filters));
        }
    }
}

} // namespace

std::string_view to_string(Variant v) noexcept {
    switch (v) {
    case Variant::undercomplete_only: return "undercomplete_only";
    case Variant::overcomplete_only: return "overcomplete_only";
    case Variant::oucd_no_msff: return "oucd_no_msff";
    case Variant::oucd: return "oucd";
    }
    return "oucd";
}

Variant parse_variant(std::string_view name) {
    for (const Variant v : ablation_order()) {
        if (to_string(v) == name) {
            return v;
        }
    }
    throw UsageError("unknown variant '" + std::string(name) + "'");
}

std::string_view ablation_label(Variant v) noexcept {
    switch (v) {
    case Variant::undercomplete_only: return "under complete UNet";
    case Variant::overcomplete_only: return "Overcomplete UNet";
    case Variant::oucd_no_msff: return "OUCD w/o MSFF block";
    case Variant::oucd: return "OUCD w/ MSFF block";
    }
    return "";
}

const std::vector<Variant>& ablation_order() {
    static const std::vector<Variant> order = {Variant::undercomplete_only,
                                               Variant::overcomplete_only,
                                               Variant::oucd_no_msff, Variant::oucd};
    return order;
}

std::string_view to_string(LayerKind k) noexcept {
    switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::maxpool2: return "maxpool2";
    case LayerKind::upsample2: return "upsample2";
    case LayerKind::relu: return "relu";
    case LayerKind::add_skip: return "add_skip";
    case LayerKind::conv1x1: return "conv1x1";
    }
    return "";
}

std::vector<LayerSpec> expand_layers(const BranchConfig& branch, int kernel, int padding) {
    auto resample_layer = [](Resample r) {
        return LayerSpec{r == Resample::upsample2 ? LayerKind::upsample2 : LayerKind::maxpool2};
    };
    std::vector<LayerSpec> layers;
    for (const auto& blk : branch.encoder) {
        layers.push_back(LayerSpec{LayerKind::conv, blk.filters, kernel, padding});
        layers.push_back(resample_layer(blk.resample));
        layers.push_back(LayerSpec{LayerKind::relu});
    }
    const int n = static_cast<int>(branch.encoder.size());
    for (int j = 0; j < static_cast<int>(branch.decoder.size()); ++j) {
        const auto& blk = branch.decoder[static_cast<std::size_t>(j)];
        layers.push_back(LayerSpec{LayerKind::conv, blk.filters, kernel, padding});
        LayerSpec skip{LayerKind::add_skip};
        skip.skip_from = n - j;
        layers.push_back(skip);
        layers.push_back(resample_layer(blk.resample));
        layers.push_back(LayerSpec{LayerKind::relu});
    }
    return layers;
}

std::vector<int> MsffConfig::factors() const {
    std::vector<int> out;
    for (const auto& src : sources) {
        const double ratio = src.scale / target_scale;
        const double rounded = std::round(ratio);
        if (ratio < 1.0 || std::abs(ratio - rounded) > 1e-9) {
            throw ConfigError("msff: source scale " + std::to_string(src.scale) +
                              " is not an integer multiple of target scale " +
                              std::to_string(target_scale));
        }
        out.push_back(static_cast<int>(rounded));
    }
    return out;
}

MsffConfig ModelConfig::encoder_fusion() const {
    const Scales oc = block_scales(overcomplete);
    const Scales uc = block_scales(undercomplete);
    MsffConfig cfg;
    for (std::size_t i = 0; i < overcomplete.encoder.size(); ++i) {
        cfg.sources.push_back({oc.encoder[i], overcomplete.encoder[i].filters});
    }
    cfg.target_scale = uc.encoder.front();
    cfg.target_channels = undercomplete.encoder.front().filters;
    return cfg;
}

MsffConfig ModelConfig::decoder_fusion() const {
    const Scales oc = block_scales(overcomplete);
    const Scales uc = block_scales(undercomplete);
    MsffConfig cfg;
    for (std::size_t i = 0; i < overcomplete.decoder.size(); ++i) {
        cfg.sources.push_back({oc.decoder[i], overcomplete.decoder[i].filters});
    }
    const std::size_t last = undercomplete.decoder.size() - 1;
    // The tensor entering the last decoder block is the previous block's output.
    cfg.target_scale = last == 0 ? uc.encoder.back() : uc.decoder[last - 1];
    cfg.target_channels =
        last == 0 ? undercomplete.encoder.back().filters : undercomplete.decoder[last - 1].filters;
    return cfg;
}

int ModelConfig::required_divisor() const noexcept {
    if (!uses_undercomplete()) {
        return 1;
    }
    return 1 << undercomplete.encoder.size();
}

void ModelConfig::validate() const {
    if (in_channels < 1 || out_channels < 1) {
        throw ConfigError("model channel counts must be positive");
    }
    if (kernel < 1 || kernel % 2 == 0 || padding < 0 || 2 * padding != kernel - 1) {
        throw ConfigError("model kernel must be odd with 'same' padding");
    }
    validate_branch(overcomplete, "overcomplete", kOvercompleteBlocks, Resample::upsample2,
                    Resample::maxpool2);
    validate_branch(undercomplete, "undercomplete", kUndercompleteBlocks, Resample::maxpool2,
                    Resample::upsample2);
    if (uses_overcomplete() && uses_undercomplete() &&
        overcomplete.decoder.back().filters != undercomplete.decoder.back().filters) {
        throw ConfigError("branch outputs must have equal channel counts to be fused");
    }
    if (uses_msff()) {
        static_cast<void>(encoder_fusion().factors());
        static_cast<void>(decoder_fusion().factors());
    }
}

bool ModelConfig::canonical() const {
    const ModelConfig ref = canonical_model(variant);
    return overcomplete == ref.overcomplete && undercomplete == ref.undercomplete &&
           kernel == ref.kernel && padding == ref.padding && in_channels == ref.in_channels &&
           out_channels == ref.out_channels;
}

ConfigFile ModelConfig::to_config() const {
    ConfigFile cfg;
    cfg.set("model.preset", preset);
    cfg.set("model.variant", std::string(to_string(variant)));
    cfg.set("model.in_channels", std::to_string(in_channels));
    cfg.set("model.out_channels", std::to_string(out_channels));
    cfg.set("model.kernel", std::to_string(kernel));
    cfg.set("model.padding", std::to_string(padding));
    cfg.set("model.oc_encoder", join(filters_of(overcomplete.encoder)));
    cfg.set("model.oc_decoder", join(filters_of(overcomplete.decoder)));
    cfg.set("model.uc_encoder", join(filters_of(undercomplete.encoder)));
    cfg.set("model.uc_decoder", join(filters_of(undercomplete.decoder)));
    return cfg;
}

std::string ModelConfig::to_text() const {
    return to_config().section_text("model");
}

std::uint64_t ModelConfig::fingerprint() const {
    return fnv1a64(to_text());
}

ModelConfig ModelConfig::from_config(const ConfigFile& cfg) {
    const Variant variant = parse_variant(cfg.get_string("model.variant", "oucd"));
    ModelConfig m = preset_model(cfg.get_string("model.preset", "small"), variant);
    m.in_channels = static_cast<int>(cfg.get_int("model.in_channels", m.in_channels));
    m.out_channels = static_cast<int>(cfg.get_int("model.out_channels", m.out_channels));
    m.kernel = static_cast<int>(cfg.get_int("model.kernel", m.kernel));
    m.padding = static_cast<int>(cfg.get_int("model.padding", m.padding));
    m.overcomplete.encoder = blocks(
        cfg.get_int_list("model.oc_encoder", filters_of(m.overcomplete.encoder)), Resample::upsample2);
    m.overcomplete.decoder = blocks(
        cfg.get_int_list("model.oc_decoder", filters_of(m.overcomplete.decoder)), Resample::maxpool2);
    m.undercomplete.encoder = blocks(
        cfg.get_int_list("model.uc_encoder", filters_of(m.undercomplete.encoder)), Resample::maxpool2);
    m.undercomplete.decoder = blocks(
        cfg.get_int_list("model.uc_decoder", filters_of(m.undercomplete.decoder)),
        Resample::upsample2);
    if (m.preset == "canonical" && !m.canonical()) {
        m.preset = "custom";
    }
    m.validate();
    return m;
}

BranchConfig overcomplete_branch(std::vector<int> encoder_filters) {
    BranchConfig b;
    b.encoder = blocks(encoder_filters, Resample::upsample2);
    std::vector<int> mirrored(encoder_filters.rbegin(), encoder_filters.rend());
    b.decoder = blocks(mirrored, Resample::maxpool2);
    return b;
}

BranchConfig undercomplete_branch(std::vector<int> encoder_filters) {
    BranchConfig b;
    b.encoder = blocks(encoder_filters, Resample::maxpool2);
    std::vector<int> mirrored(encoder_filters.rbegin(), encoder_filters.rend());
    b.decoder = blocks(mirrored, Resample::upsample2);
    return b;
}

ModelConfig canonical_model(Variant variant) {
    ModelConfig m;
    m.preset = "canonical";
    m.variant = variant;
    m.overcomplete = overcomplete_branch({32, 64, 128});
    m.undercomplete = undercomplete_branch({32, 64, 128, 256, 512});
    return m;
}

ModelConfig small_model(Variant variant) {
    ModelConfig m;
    m.preset = "small";
    m.variant = variant;
    m.overcomplete = overcomplete_branch({8, 16, 32});
    m.undercomplete = undercomplete_branch({8, 16, 32, 64, 128});
    return m;
}

ModelConfig preset_model(std::string_view preset, Variant variant) {
    if (preset == "canonical") {
        return canonical_model(variant);
    }
    if (preset == "small") {
        return small_model(variant);
    }
    throw UsageError("unknown preset '" + std::string(preset) + "' (expected canonical or small)");
}

} // namespace oucd
