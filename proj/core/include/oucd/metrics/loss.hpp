#pragma once

#include <vector>

#include "oucd/metrics/extractor.hpp"
#include "oucd/tensor/tape.hpp"

namespace oucd {

struct LossConfig {
    /// Weight of the perceptual term.
    double lambda = 0.04;
    /// Extractor taps averaged by the perceptual term.
    std::vector<int> perceptual_layers{0, 1, 2};

    /// Throws ConfigError on negative lambda or tap indices outside the extractor.
    void validate() const;
};

/// Mean of squared differences (not the sum), so lambda keeps its meaning at any patch size.
template <typename T>
Var mse_loss(Tape<T>& tape, Var x_hat, Var x);

/// Per tap, mean squared feature difference; the taps are averaged. `x` is
/// treated as a fixed target.
template <typename T>
Var perceptual_loss(Tape<T>& tape, const FeatureExtractor<T>& extractor, Var x_hat, Var x,
                    const std::vector<int>& taps);

template <typename T>
struct LossTerms {
    Var total;
    Var mse;
    /// Only valid when `has_perceptual`; lambda = 0 skips the extractor entirely.
    Var perceptual;
    bool has_perceptual = false;
};

/// mse + lambda * perceptual. With lambda = 0 the total is the MSE node itself.
template <typename T>
LossTerms<T> total_loss(Tape<T>& tape, Var x_hat, Var x, const FeatureExtractor<T>& extractor,
                        const LossConfig& cfg);

} // namespace oucd
