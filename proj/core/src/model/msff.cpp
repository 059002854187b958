#include "oucd/model/msff.hpp"

#include "oucd/common/error.hpp"

namespace oucd {

template <typename T>
Msff<T>::Msff(std::string prefix, MsffConfig config)
    : prefix_(std::move(prefix)), config_(std::move(config)), factors_(config_.factors()) {
    if (config_.sources.empty() || config_.target_channels < 1) {
        throw ConfigError("msff needs at least one source and a positive target channel count");
    }
    for (std::size_t i = 0; i < config_.sources.size(); ++i) {
        convs_.emplace_back(prefix_ + ".src" + std::to_string(i + 1), config_.sources[i].channels,
                            config_.target_channels, 1, 0);
    }
}

template <typename T>
Var Msff<T>::forward(ParamBinder<T>& bind, std::span<const Var> sources, Trace* trace) const {
    Tape<T>& tape = bind.tape();
    if (sources.size() != convs_.size()) {
        throw ConfigError("msff expects " + std::to_string(convs_.size()) + " sources, got " +
                          std::to_string(sources.size()));
    }
    Var sum{};
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const Shape& s = tape.value(sources[i]).shape();
        if (s.c != config_.sources[i].channels) {
            throw ConfigError("msff source " + std::to_string(i + 1) + " has " +
                              std::to_string(s.c) + " channels, expected " +
                              std::to_string(config_.sources[i].channels));
        }
        const Var down = tape.downsample(sources[i], factors_[i]);
        const Var proj = convs_[i].forward(bind, down);
        if (trace) {
            trace->add(TraceRow{"Fusion", prefix_, "Down×" + std::to_string(factors_[i]) + "+Conv1x1",
                                "1 × 1", std::to_string(config_.target_channels), "0", s,
                                tape.value(proj).shape(), false});
        }
        sum = i == 0 ? proj : tape.add(sum, proj);
    }
    return sum;
}

template <typename T>
void Msff<T>::initialize(std::uint64_t seed) {
    for (auto& c : convs_) {
        c.initialize(seed);
    }
}

template <typename T>
void Msff<T>::collect(std::vector<NamedParameter<T>>& out) {
    for (auto& c : convs_) {
        c.collect(out);
    }
}

template class Msff<float>;
template class Msff<double>;

} // namespace oucd
