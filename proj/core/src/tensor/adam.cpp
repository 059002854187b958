#include "oucd/tensor/adam.hpp"

#include <cmath>

#include "oucd/common/error.hpp"

namespace oucd {

template <typename T>
void adam_step(Tensor<T>& param, std::span<const T> grad, AdamState<T>& state, T lr) {
    if (grad.size() != param.size()) {
        throw ContractError("adam_step: gradient length does not match parameter");
    }
    if (state.first_moment.empty() && state.second_moment.empty()) {
        state.first_moment.assign(param.size(), T{0});
        state.second_moment.assign(param.size(), T{0});
    }
    if (state.first_moment.size() != param.size() || state.second_moment.size() != param.size()) {
        throw ContractError("adam_step: moment buffers do not match parameter");
    }
    if (!(lr > T{0})) {
        throw ContractError("adam_step: learning rate must be positive");
    }
    state.step_count += 1;
    const auto t = static_cast<double>(state.step_count);
    const T correction1 = T(1) - static_cast<T>(std::pow(static_cast<double>(state.beta1), t));
    const T correction2 = T(1) - static_cast<T>(std::pow(static_cast<double>(state.beta2), t));

    auto p = param.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const T g = grad[i];
        T& m = state.first_moment[i];
        T& v = state.second_moment[i];
        m = state.beta1 * m + (T(1) - state.beta1) * g;
        v = state.beta2 * v + (T(1) - state.beta2) * g * g;
        const T m_hat = m / correction1;
        const T v_hat = v / correction2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

template void adam_step(Tensor<float>&, std::span<const float>, AdamState<float>&, float);
template void adam_step(Tensor<double>&, std::span<const double>, AdamState<double>&, double);

} // namespace oucd
