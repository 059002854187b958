#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oucd/tensor/tensor.hpp"

namespace oucd {

/// Per-parameter Adam moments. Defaults are the usual 0.9 / 0.999 / 1e-8.
template <typename T>
struct AdamState {
    std::vector<T> first_moment;
    std::vector<T> second_moment;
    std::uint64_t step_count = 0;
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T epsilon = T(1e-8);

    AdamState() = default;
    explicit AdamState(std::size_t size)
        : first_moment(size, T{0}), second_moment(size, T{0}) {}
};

/// One bias-corrected Adam update of `param` in place; increments step_count.
template <typename T>
void adam_step(Tensor<T>& param, std::span<const T> grad, AdamState<T>& state, T lr);

extern template void adam_step(Tensor<float>&, std::span<const float>, AdamState<float>&, float);
extern template void adam_step(Tensor<double>&, std::span<const double>, AdamState<double>&,
                               double);

} // namespace oucd
