#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "oucd/tensor/ops.hpp"
#include "oucd/tensor/tensor.hpp"

namespace oucd {

/// Handle to a value recorded on a Tape.
struct Var {
    std::uint32_t id = 0;
};

/// Reverse-mode recorder. Nodes are appended in execution order, so the node
/// list is already a topological order and backward() simply walks it in
/// reverse. Parameters are bound by reference: their gradients accumulate
/// into Tensor::grad() of the bound tensor, which must outlive the tape.
///
/// A tape built with `record_grad = false` keeps forward values only; it is
/// what inference uses.
template <typename T>
class Tape {
public:
    explicit Tape(bool record_grad = true) : record_grad_(record_grad) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) noexcept = default;
    Tape& operator=(Tape&&) noexcept = default;

    /// Trainable tensor; gradient goes to `param.grad()`.
    Var parameter(Tensor<T>& param);
    /// Borrowed tensor that never receives a gradient (frozen weights, inference).
    Var frozen(const Tensor<T>& value);
    /// Value that never receives a gradient.
    Var constant(Tensor<T> value);
    /// Value whose gradient is kept on the tape (read it with grad()).
    Var input(Tensor<T> value);

    [[nodiscard]] const Tensor<T>& value(Var v) const;
    /// Gradient of the last backward() w.r.t. `v`. Throws if v never received one.
    [[nodiscard]] const Tensor<T>& grad(Var v) const;
    [[nodiscard]] bool requires_grad(Var v) const { return node(v).requires_grad; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] bool recording() const noexcept { return record_grad_; }

    Var conv2d(Var x, Var weight, Var bias, int stride, int padding);
    Var maxpool2(Var x);
    Var resize(Var x, int out_h, int out_w);
    Var upsample2(Var x);
    /// Bilinear downsampling by an integer factor (H and W must divide).
    Var downsample(Var x, int factor);
    Var relu(Var x);
    Var add(Var a, Var b);
    /// Scalar mean squared error between two equally-shaped values.
    Var mse(Var a, Var b);
    /// Scalar sum of all elements.
    Var sum(Var x);
    /// Scalar sum(x * weights), weights fixed.
    Var dot(Var x, const Tensor<T>& weights);
    Var scale(Var x, T factor);

    /// Replays the recorded graph in reverse, populating gradients of every
    /// node reachable from `loss`. `loss` must be a 1x1x1x1 scalar.
    void backward(Var loss);

private:
    struct Node {
        Tensor<T> value;
        const Tensor<T>* borrowed = nullptr;
        Tensor<T>* grad_sink = nullptr;
        bool requires_grad = false;
        Tensor<T> grad;
        bool has_grad = false;
        std::function<void(Tape&, const Tensor<T>& grad_out)> backprop;
    };

    [[nodiscard]] const Node& node(Var v) const;
    Node& node(Var v);
    Var push(Tensor<T> value, bool requires_grad,
             std::function<void(Tape&, const Tensor<T>&)> backprop);
    [[nodiscard]] bool any_requires(std::initializer_list<Var> vars) const;
    void accumulate(Var v, Tensor<T> g);

    std::vector<Node> nodes_;
    bool record_grad_ = true;
    bool consumed_ = false;
};

extern template class Tape<float>;
extern template class Tape<double>;

} // namespace oucd
