#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oucd {

/// NCHW extent. All four dimensions are >= 1 for a valid tensor.
struct Shape {
    int n = 1;
    int c = 1;
    int h = 1;
    int w = 1;

    [[nodiscard]] std::size_t numel() const noexcept {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    [[nodiscard]] std::size_t plane() const noexcept {
        return static_cast<std::size_t>(h) * w;
    }
    [[nodiscard]] bool valid() const noexcept { return n >= 1 && c >= 1 && h >= 1 && w >= 1; }
    [[nodiscard]] std::string str() const;

    bool operator==(const Shape&) const = default;
};

/// Dense 4-D array of reals, row-major NCHW, with an optional gradient buffer
/// of identical shape. Values are not shared between copies.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() : Tensor(Shape{}) {}
    explicit Tensor(Shape shape, T fill = T{0});
    Tensor(Shape shape, std::vector<T> values);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& values() const noexcept { return data_; }

    [[nodiscard]] std::size_t index(int n, int c, int h, int w) const noexcept {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }
    T& at(int n, int c, int h, int w) noexcept { return data_[index(n, c, h, w)]; }
    [[nodiscard]] T at(int n, int c, int h, int w) const noexcept { return data_[index(n, c, h, w)]; }

    /// Pointer to the (n, c) spatial plane.
    T* plane(int n, int c) noexcept { return data_.data() + index(n, c, 0, 0); }
    [[nodiscard]] const T* plane(int n, int c) const noexcept { return data_.data() + index(n, c, 0, 0); }

    [[nodiscard]] bool has_grad() const noexcept { return grad_.has_value(); }
    /// Allocates a zeroed gradient buffer if none exists.
    std::span<T> ensure_grad();
    [[nodiscard]] std::span<T> grad();
    [[nodiscard]] std::span<const T> grad() const;
    void zero_grad();
    void drop_grad() noexcept { grad_.reset(); }

    void fill(T value);

    /// Copy of sample `n` as a batch-of-one tensor.
    [[nodiscard]] Tensor sample(int n) const;

    template <typename U>
    [[nodiscard]] Tensor<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        return Tensor<U>(shape_, std::move(out));
    }

private:
    Shape shape_;
    std::vector<T> data_;
    std::optional<std::vector<T>> grad_;
};

/// Stacks batch-of-N tensors along the batch axis. All inputs must share C, H, W.
template <typename T>
Tensor<T> concat_batch(std::span<const Tensor<T>> parts);

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b);

extern template class Tensor<float>;
extern template class Tensor<double>;

} // namespace oucd
