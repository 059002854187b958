#include "oucd/model/network.hpp"

#include "oucd/common/error.hpp"

namespace oucd {

template <typename T>
Network<T>::Network(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
    config_.validate();
    if (config_.uses_overcomplete()) {
        overcomplete_ = std::make_unique<Branch<T>>("oc", "Overcomplete", config_.overcomplete,
                                                    config_.in_channels, config_.kernel,
                                                    config_.padding);
        overcomplete_->initialize(seed_);
    }
    if (config_.uses_undercomplete()) {
        undercomplete_ = std::make_unique<Branch<T>>("uc", "Undercomplete", config_.undercomplete,
                                                     config_.in_channels, config_.kernel,
                                                     config_.padding);
        undercomplete_->initialize(seed_);
    }
    if (config_.uses_msff()) {
        msff_enc_ = std::make_unique<Msff<T>>("msff_enc", config_.encoder_fusion());
        msff_dec_ = std::make_unique<Msff<T>>("msff_dec", config_.decoder_fusion());
        msff_enc_->initialize(seed_);
        msff_dec_->initialize(seed_);
    }
    const int fused_channels = config_.uses_undercomplete() ? undercomplete_->out_channels()
                                                            : overcomplete_->out_channels();
    head_ = std::make_unique<ConvLayer<T>>("out", fused_channels, config_.out_channels, 1, 0);
    head_->initialize(seed_);
}

template <typename T>
void Network<T>::check_input(const Shape& s) const {
    if (s.c != config_.in_channels) {
        throw ConfigError("network expects " + std::to_string(config_.in_channels) +
                          " input channels, got " + std::to_string(s.c));
    }
    const int div = config_.required_divisor();
    if (s.h % div != 0 || s.w % div != 0) {
        throw ConfigError("input " + std::to_string(s.h) + "x" + std::to_string(s.w) +
                          " is not divisible by " + std::to_string(div));
    }
}

template <typename T>
typename Network<T>::Forward Network<T>::run(ParamBinder<T>& bind, Var y, Trace* trace,
                                             const ForwardOptions& options) const {
    Tape<T>& tape = bind.tape();
    check_input(tape.value(y).shape());
    Forward fwd;

    auto fusion_row = [&](const std::string& layer, Var in, Var out) {
        if (trace) {
            trace->add(TraceRow{"Fusion", "Add", layer, "-", "-", "-", tape.value(in).shape(),
                                tape.value(out).shape(), false});
        }
    };
    auto fuse = [&](const Msff<T>& block, std::span<const Var> sources, Var target,
                    const std::string& tap) {
        Var f = block.forward(bind, sources, trace);
        if (options.zero_fusion) {
            f = tape.constant(Tensor<T>(tape.value(f).shape()));
        }
        fwd.taps.emplace_back(tap, f);
        const Var sum = tape.add(target, f);
        fusion_row(tap, target, sum);
        return sum;
    };

    std::optional<typename Branch<T>::Outputs> oc;
    if (overcomplete_) {
        oc = overcomplete_->forward(bind, y, {}, trace);
        for (std::size_t i = 0; i < oc->encoder.size(); ++i) {
            fwd.taps.emplace_back("oc.enc." + std::to_string(i + 1), oc->encoder[i]);
        }
        for (std::size_t i = 0; i < oc->decoder.size(); ++i) {
            fwd.taps.emplace_back("oc.dec." + std::to_string(i + 1), oc->decoder[i]);
        }
    }

    Var fused{};
    if (undercomplete_) {
        typename Branch<T>::Hooks hooks;
        if (msff_enc_) {
            hooks.after_encoder_block = [&](int block, Var v) {
                return block == 1 ? fuse(*msff_enc_, oc->encoder, v, "msff.enc") : v;
            };
        }
        if (msff_dec_) {
            const int last = static_cast<int>(config_.undercomplete.decoder.size());
            hooks.before_decoder_block = [&, last](int block, Var v) {
                return block == last ? fuse(*msff_dec_, oc->decoder, v, "msff.dec") : v;
            };
        }
        const auto uc = undercomplete_->forward(bind, y, hooks, trace);
        for (std::size_t i = 0; i < uc.encoder.size(); ++i) {
            fwd.taps.emplace_back("uc.enc." + std::to_string(i + 1), uc.encoder[i]);
        }
        for (std::size_t i = 0; i < uc.decoder.size(); ++i) {
            fwd.taps.emplace_back("uc.dec." + std::to_string(i + 1), uc.decoder[i]);
        }
        fused = uc.output;
        if (oc) {
            fused = tape.add(uc.output, oc->output);
            fusion_row("branch outputs", uc.output, fused);
        }
    } else {
        fused = oc->output;
    }
    fwd.taps.emplace_back("fused", fused);

    fwd.output = head_->forward(bind, fused);
    if (trace) {
        trace->add(TraceRow{"Output", "Head", "Conv1x1", "1 × 1",
                            std::to_string(config_.out_channels), "0", tape.value(fused).shape(),
                            tape.value(fwd.output).shape(), false});
    }
    return fwd;
}

template <typename T>
typename Network<T>::Forward Network<T>::forward(Tape<T>& tape, Var y, Trace* trace,
                                                 const ForwardOptions& options) {
    ParamBinder<T> bind(tape);
    return run(bind, y, trace, options);
}

template <typename T>
Tensor<T> Network<T>::infer(const Tensor<T>& y, Trace* trace,
                            const ForwardOptions& options) const {
    Tape<T> tape(false);
    ParamBinder<T> bind(tape);
    const Var in = tape.frozen(y);
    return tape.value(run(bind, in, trace, options).output);
}

template <typename T>
std::vector<NamedParameter<T>> Network<T>::parameters() {
    std::vector<NamedParameter<T>> out;
    if (overcomplete_) {
        overcomplete_->collect(out);
    }
    if (undercomplete_) {
        undercomplete_->collect(out);
    }
    if (msff_enc_) {
        msff_enc_->collect(out);
        msff_dec_->collect(out);
    }
    head_->collect(out);
    return out;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> Network<T>::parameters() const {
    std::vector<std::pair<std::string, const Tensor<T>*>> out;
    for (const auto& p : const_cast<Network*>(this)->parameters()) {
        out.emplace_back(p.name, p.tensor);
    }
    return out;
}

template <typename T>
std::size_t Network<T>::param_count() const {
    std::size_t total = 0;
    for (const auto& [name, tensor] : parameters()) {
        total += tensor->size();
    }
    return total;
}

template <typename T>
void Network<T>::zero_grad() {
    for (auto& p : parameters()) {
        p.tensor->zero_grad();
    }
}

template <typename T>
void Network<T>::zero_parameters() {
    for (auto& p : parameters()) {
        p.tensor->fill(T{0});
    }
}

std::size_t param_count(const ModelConfig& config) {
    return Network<float>(config, 0).param_count();
}

template class Network<float>;
template class Network<double>;

} // namespace oucd
