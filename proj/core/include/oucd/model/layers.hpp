#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oucd/common/rng.hpp"
#include "oucd/tensor/tape.hpp"

namespace oucd {

template <typename T>
struct NamedParameter {
    std::string name;
    Tensor<T>* tensor = nullptr;
};

/// Puts parameters on a tape: trainable when the tape records gradients,
/// frozen (borrowed, no gradient) otherwise.
template <typename T>
class ParamBinder {
public:
    explicit ParamBinder(Tape<T>& tape) : tape_(tape) {}

    [[nodiscard]] Tape<T>& tape() noexcept { return tape_; }

    Var operator()(const Tensor<T>& param) {
        if (!tape_.recording()) {
            return tape_.frozen(param);
        }
        // Only reached through the non-const forward path, so the tensor is mutable.
        return tape_.parameter(const_cast<Tensor<T>&>(param));
    }

private:
    Tape<T>& tape_;
};

/// Square-kernel convolution with stride 1.
template <typename T>
struct ConvLayer {
    std::string name;
    Tensor<T> weight;
    Tensor<T> bias;
    int padding = 0;

    ConvLayer(std::string layer_name, int in_channels, int out_channels, int kernel, int pad)
        : name(std::move(layer_name)),
          weight(Shape{out_channels, in_channels, kernel, kernel}),
          bias(Shape{out_channels, 1, 1, 1}),
          padding(pad) {}

    [[nodiscard]] int in_channels() const noexcept { return weight.shape().c; }
    [[nodiscard]] int out_channels() const noexcept { return weight.shape().n; }
    [[nodiscard]] int kernel() const noexcept { return weight.shape().h; }

    Var forward(ParamBinder<T>& bind, Var x) const {
        return bind.tape().conv2d(x, bind(weight), bind(bias), 1, padding);
    }

    /// Fan-in scaled uniform weights, bound sqrt(1 / (in_channels * k^2)), zero bias.
    /// The stream is derived from (seed, name), so a layer's initial values do
    /// not depend on which other layers exist.
    void initialize(std::uint64_t seed) {
        Rng rng(derive_seed(seed, name));
        const double bound = std::sqrt(1.0 / (in_channels() * kernel() * kernel()));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : weight.data()) {
            v = static_cast<T>(dist(rng));
        }
        bias.fill(T{0});
    }

    void collect(std::vector<NamedParameter<T>>& out) {
        out.push_back({name + ".weight", &weight});
        out.push_back({name + ".bias", &bias});
    }
};

} // namespace oucd
