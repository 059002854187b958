#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oucd/model/config.hpp"
#include "oucd/model/layers.hpp"
#include "oucd/model/trace.hpp"

namespace oucd {

/// Encoder/decoder stack with additive skips, interpreted from its LayerSpec list.
/// The overcomplete branch upsamples in the encoder and pools in the decoder;
/// the undercomplete branch does the opposite.
template <typename T>
class Branch {
public:
    /// Block indices are 1-based. The returned Var replaces the original.
    struct Hooks {
        std::function<Var(int block, Var)> after_encoder_block;
        std::function<Var(int block, Var)> before_decoder_block;
    };

    struct Outputs {
        std::vector<Var> encoder;
        std::vector<Var> decoder;
        Var output;
    };

    Branch(std::string prefix, std::string title, BranchConfig config, int in_channels,
           int kernel, int padding);

    Outputs forward(ParamBinder<T>& bind, Var x, const Hooks& hooks, Trace* trace) const;

    [[nodiscard]] const BranchConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
    [[nodiscard]] int out_channels() const noexcept { return config_.decoder.back().filters; }

    void initialize(std::uint64_t seed);
    void collect(std::vector<NamedParameter<T>>& out);

private:
    std::string prefix_;
    std::string title_;
    BranchConfig config_;
    std::vector<LayerSpec> layers_;
    std::vector<ConvLayer<T>> convs_;
};

extern template class Branch<float>;
extern template class Branch<double>;

} // namespace oucd
