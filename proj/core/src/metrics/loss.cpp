#include "oucd/metrics/loss.hpp"

#include "oucd/common/error.hpp"

namespace oucd {

void LossConfig::validate() const {
    if (!(lambda >= 0.0)) {
        throw ConfigError("loss lambda must be non-negative");
    }
    if (perceptual_layers.empty()) {
        throw ConfigError("perceptual loss needs at least one tap");
    }
    for (const int t : perceptual_layers) {
        if (t < 0 || t >= FeatureExtractor<float>::kTaps) {
            throw ConfigError("perceptual tap " + std::to_string(t) + " out of range [0, " +
                              std::to_string(FeatureExtractor<float>::kTaps) + ")");
        }
    }
}

template <typename T>
Var mse_loss(Tape<T>& tape, Var x_hat, Var x) {
    if (!(tape.value(x_hat).shape() == tape.value(x).shape())) {
        throw ContractError("mse_loss: shape mismatch " + tape.value(x_hat).shape().str() +
                            " vs " + tape.value(x).shape().str());
    }
    return tape.mse(x_hat, x);
}

template <typename T>
Var perceptual_loss(Tape<T>& tape, const FeatureExtractor<T>& extractor, Var x_hat, Var x,
                    const std::vector<int>& taps) {
    if (taps.empty()) {
        throw ConfigError("perceptual loss needs at least one tap");
    }
    for (const int t : taps) {
        if (t < 0 || t >= FeatureExtractor<T>::kTaps) {
            throw ConfigError("perceptual tap " + std::to_string(t) + " out of range");
        }
    }
    const auto fa = extractor.forward(tape, x_hat);
    // The target's features carry no gradient.
    const Var target = tape.constant(tape.value(x));
    const auto fb = extractor.forward(tape, target);
    Var acc{};
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const Var term = tape.mse(fa[taps[i]], fb[taps[i]]);
        acc = i == 0 ? term : tape.add(acc, term);
    }
    return taps.size() == 1 ? acc : tape.scale(acc, static_cast<T>(1.0 / taps.size()));
}

template <typename T>
LossTerms<T> total_loss(Tape<T>& tape, Var x_hat, Var x, const FeatureExtractor<T>& extractor,
                        const LossConfig& cfg) {
    cfg.validate();
    LossTerms<T> out;
    out.mse = mse_loss(tape, x_hat, x);
    out.total = out.mse;
    if (cfg.lambda > 0.0) {
        out.perceptual = perceptual_loss(tape, extractor, x_hat, x, cfg.perceptual_layers);
        out.has_perceptual = true;
        out.total = tape.add(out.mse, tape.scale(out.perceptual, static_cast<T>(cfg.lambda)));
    }
    return out;
}

#define OUCD_INSTANTIATE_LOSS(T)                                                               \
    template Var mse_loss<T>(Tape<T>&, Var, Var);                                              \
    template Var perceptual_loss<T>(Tape<T>&, const FeatureExtractor<T>&, Var, Var,            \
                                    const std::vector<int>&);                                  \
    template LossTerms<T> total_loss<T>(Tape<T>&, Var, Var, const FeatureExtractor<T>&,        \
                                        const LossConfig&);

OUCD_INSTANTIATE_LOSS(float)
OUCD_INSTANTIATE_LOSS(double)

} // namespace oucd
