#include "oucd/model/branch.hpp"

#include "oucd/common/error.hpp"

namespace oucd {
namespace {

std::string kernel_label(int k) {
    return std::to_string(k) + " × " + std::to_string(k);
}

} // namespace

template <typename T>
Branch<T>::Branch(std::string prefix, std::string title, BranchConfig config, int in_channels,
                  int kernel, int padding)
    : prefix_(std::move(prefix)),
      title_(std::move(title)),
      config_(std::move(config)),
      layers_(expand_layers(config_, kernel, padding)) {
    int channels = in_channels;
    for (std::size_t i = 0; i < config_.encoder.size(); ++i) {
        const int f = config_.encoder[i].filters;
        convs_.emplace_back(prefix_ + ".enc" + std::to_string(i + 1) + ".conv", channels, f,
                            kernel, padding);
        channels = f;
    }
    for (std::size_t j = 0; j < config_.decoder.size(); ++j) {
        const int f = config_.decoder[j].filters;
        convs_.emplace_back(prefix_ + ".dec" + std::to_string(j + 1) + ".conv", channels, f,
                            kernel, padding);
        channels = f;
    }
}

template <typename T>
typename Branch<T>::Outputs Branch<T>::forward(ParamBinder<T>& bind, Var x, const Hooks& hooks,
                                               Trace* trace) const {
    Tape<T>& tape = bind.tape();
    Outputs out;
    const int blocks = static_cast<int>(config_.encoder.size());
    std::size_t conv_index = 0;
    int block = 0;
    bool in_decoder = false;
    Var current = x;

    auto record = [&](const std::string& layer, std::string kernel, std::string filters,
                      std::string padding, Var in, Var result, bool table_row) {
        if (trace) {
            trace->add(TraceRow{title_, in_decoder ? "Decoder" : "Encoder", layer,
                                std::move(kernel), std::move(filters), std::move(padding),
                                tape.value(in).shape(), tape.value(result).shape(), table_row});
        }
    };

    for (const LayerSpec& spec : layers_) {
        switch (spec.kind) {
        case LayerKind::conv:
        case LayerKind::conv1x1: {
            if (conv_index == static_cast<std::size_t>(blocks)) {
                in_decoder = true;
                block = 0;
            }
            ++block;
            if (in_decoder && hooks.before_decoder_block) {
                current = hooks.before_decoder_block(block, current);
            }
            const Var in = current;
            current = convs_[conv_index++].forward(bind, current);
            record("Conv" + std::to_string(block), kernel_label(spec.kernel),
                   std::to_string(spec.filters), std::to_string(spec.padding), in, current, true);
            break;
        }
        case LayerKind::upsample2:
        case LayerKind::maxpool2: {
            const Var in = current;
            current = spec.kind == LayerKind::upsample2 ? tape.upsample2(current)
                                                        : tape.maxpool2(current);
            record(spec.kind == LayerKind::upsample2 ? "Upsampling" : "MaxPooling", "2 × 2", "-",
                   "-", in, current, true);
            break;
        }
        case LayerKind::relu: {
            const Var in = current;
            current = tape.relu(current);
            record("ReLU", "-", "-", "-", in, current, true);
            if (!in_decoder) {
                if (hooks.after_encoder_block) {
                    current = hooks.after_encoder_block(block, current);
                }
                out.encoder.push_back(current);
            } else {
                out.decoder.push_back(current);
            }
            break;
        }
        case LayerKind::add_skip: {
            const Var skip = out.encoder.at(static_cast<std::size_t>(spec.skip_from - 1));
            const Var in = current;
            current = tape.add(current, skip);
            record("SkipAdd(enc" + std::to_string(spec.skip_from) + ")", "-", "-", "-", in,
                   current, false);
            break;
        }
        }
    }
    out.output = current;
    return out;
}

template <typename T>
void Branch<T>::initialize(std::uint64_t seed) {
    for (auto& c : convs_) {
        c.initialize(seed);
    }
}

template <typename T>
void Branch<T>::collect(std::vector<NamedParameter<T>>& out) {
    for (auto& c : convs_) {
        c.collect(out);
    }
}

template class Branch<float>;
template class Branch<double>;

} // namespace oucd
