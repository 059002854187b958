#include "oucd/tensor/tensor.hpp"

#include <algorithm>
#include <cstring>

#include "oucd/common/error.hpp"

namespace oucd {

std::string Shape::str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(shape) {
    if (!shape.valid()) {
        throw ContractError("tensor dimensions must be >= 1, got " + shape.str());
    }
    data_.assign(shape.numel(), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
    if (!shape.valid()) {
        throw ContractError("tensor dimensions must be >= 1, got " + shape.str());
    }
    if (data_.size() != shape.numel()) {
        throw ContractError("tensor data length " + std::to_string(data_.size()) +
                            " does not match shape " + shape.str());
    }
}

template <typename T>
std::span<T> Tensor<T>::ensure_grad() {
    if (!grad_) {
        grad_.emplace(data_.size(), T{0});
    }
    return *grad_;
}

template <typename T>
std::span<T> Tensor<T>::grad() {
    if (!grad_) {
        throw ContractError("tensor has no gradient buffer");
    }
    return *grad_;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
    if (!grad_) {
        throw ContractError("tensor has no gradient buffer");
    }
    return *grad_;
}

template <typename T>
void Tensor<T>::zero_grad() {
    if (grad_) {
        std::fill(grad_->begin(), grad_->end(), T{0});
    }
}

template <typename T>
void Tensor<T>::fill(T value) {
    std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Tensor<T> Tensor<T>::sample(int n) const {
    if (n < 0 || n >= shape_.n) {
        throw ContractError("sample index out of range");
    }
    Shape s = shape_;
    s.n = 1;
    const std::size_t stride = s.numel();
    std::vector<T> out(data_.begin() + static_cast<std::ptrdiff_t>(n * stride),
                       data_.begin() + static_cast<std::ptrdiff_t>((n + 1) * stride));
    return Tensor<T>(s, std::move(out));
}

template <typename T>
Tensor<T> concat_batch(std::span<const Tensor<T>> parts) {
    if (parts.empty()) {
        throw ContractError("concat_batch needs at least one tensor");
    }
    Shape s = parts.front().shape();
    int total = 0;
    for (const auto& p : parts) {
        const Shape& ps = p.shape();
        if (ps.c != s.c || ps.h != s.h || ps.w != s.w) {
            throw ContractError("concat_batch shape mismatch: " + ps.str() + " vs " + s.str());
        }
        total += ps.n;
    }
    s.n = total;
    std::vector<T> out;
    out.reserve(s.numel());
    for (const auto& p : parts) {
        out.insert(out.end(), p.data().begin(), p.data().end());
    }
    return Tensor<T>(s, std::move(out));
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
    return a.shape() == b.shape() &&
           std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(T)) == 0;
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> concat_batch(std::span<const Tensor<float>>);
template Tensor<double> concat_batch(std::span<const Tensor<double>>);
template bool bitwise_equal(const Tensor<float>&, const Tensor<float>&);
template bool bitwise_equal(const Tensor<double>&, const Tensor<double>&);

} // namespace oucd
