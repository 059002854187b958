#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oucd/model/branch.hpp"
#include "oucd/model/config.hpp"
#include "oucd/model/layers.hpp"
#include "oucd/model/msff.hpp"
#include "oucd/model/trace.hpp"

namespace oucd {

struct ForwardOptions {
    /// Replace both fusion outputs by zero tensors (ablation check).
    bool zero_fusion = false;
};

/// Over-and-under complete deraining network.
///
/// Pipeline for variant `oucd`:
///   1. the overcomplete branch runs on y;
///   2. fusion of its encoder maps is added to the first undercomplete encoder block output;
///   3. fusion of its decoder maps is added to the tensor entering the last undercomplete
///      decoder block;
///   4. the two branch outputs are summed;
///   5. a 1x1 conv maps to `out_channels`.
/// Other variants drop the inactive branch and/or the fusion blocks. The output
/// is the clean-image estimate itself; there is no input-to-output residual path.
template <typename T>
class Network {
public:
    struct Forward {
        Var output;
        /// Named intermediate maps: "oc.enc.1", "uc.dec.5", "msff.enc", "fused", ...
        std::vector<std::pair<std::string, Var>> taps;
    };

    Network(ModelConfig config, std::uint64_t seed);

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    [[nodiscard]] const ModelConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    /// Records the forward pass on `tape`; parameters are trainable if the tape records.
    Forward forward(Tape<T>& tape, Var y, Trace* trace = nullptr,
                    const ForwardOptions& options = {});

    /// Inference on a private non-recording tape.
    [[nodiscard]] Tensor<T> infer(const Tensor<T>& y, Trace* trace = nullptr,
                                  const ForwardOptions& options = {}) const;

    /// Parameters in a fixed order (branch, block, weight before bias).
    [[nodiscard]] std::vector<NamedParameter<T>> parameters();
    [[nodiscard]] std::vector<std::pair<std::string, const Tensor<T>*>> parameters() const;
    [[nodiscard]] std::size_t param_count() const;
    void zero_grad();
    /// Sets every parameter (weights and biases) to zero.
    void zero_parameters();

    /// Copies parameter values from a network of the same configuration, casting precision.
    template <typename U>
    void copy_parameters_from(const Network<U>& other);

    [[nodiscard]] Msff<T>* encoder_fusion() noexcept { return msff_enc_.get(); }
    [[nodiscard]] Msff<T>* decoder_fusion() noexcept { return msff_dec_.get(); }

private:
    Forward run(ParamBinder<T>& bind, Var y, Trace* trace, const ForwardOptions& options) const;
    void check_input(const Shape& s) const;

    ModelConfig config_;
    std::uint64_t seed_;
    std::unique_ptr<Branch<T>> overcomplete_;
    std::unique_ptr<Branch<T>> undercomplete_;
    std::unique_ptr<Msff<T>> msff_enc_;
    std::unique_ptr<Msff<T>> msff_dec_;
    std::unique_ptr<ConvLayer<T>> head_;
};

/// Trainable scalar count of a configuration (builds the network once).
[[nodiscard]] std::size_t param_count(const ModelConfig& config);

template <typename T>
template <typename U>
void Network<T>::copy_parameters_from(const Network<U>& other) {
    auto mine = parameters();
    auto theirs = other.parameters();
    if (mine.size() != theirs.size()) {
        throw std::logic_error("copy_parameters_from: parameter lists differ");
    }
    for (std::size_t i = 0; i < mine.size(); ++i) {
        const auto& src = theirs[i].second->data();
        auto dst = mine[i].tensor->data();
        if (mine[i].name != theirs[i].first || src.size() != dst.size()) {
            throw std::logic_error("copy_parameters_from: mismatch at " + mine[i].name);
        }
        for (std::size_t k = 0; k < dst.size(); ++k) {
            dst[k] = static_cast<T>(src[k]);
        }
    }
}

extern template class Network<float>;
extern template class Network<double>;

} // namespace oucd
