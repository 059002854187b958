#pragma once

#include <span>
#include <string>
#include <vector>

#include "oucd/model/config.hpp"
#include "oucd/model/layers.hpp"
#include "oucd/model/trace.hpp"

namespace oucd {

/// Multi-scale feature fusion: each source is bilinearly downsampled to the
/// target resolution, projected by its own 1x1 conv to the target channel
/// count, and the projections are summed.
template <typename T>
class Msff {
public:
    Msff(std::string prefix, MsffConfig config);

    Var forward(ParamBinder<T>& bind, std::span<const Var> sources, Trace* trace = nullptr) const;

    [[nodiscard]] const MsffConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<int>& factors() const noexcept { return factors_; }
    [[nodiscard]] std::vector<ConvLayer<T>>& projections() noexcept { return convs_; }

    void initialize(std::uint64_t seed);
    void collect(std::vector<NamedParameter<T>>& out);

private:
    std::string prefix_;
    MsffConfig config_;
    std::vector<int> factors_;
    std::vector<ConvLayer<T>> convs_;
};

extern template class Msff<float>;
extern template class Msff<double>;

} // namespace oucd
