#include "oucd/tensor/tape.hpp"

#include <algorithm>
#include <memory>

#include "oucd/common/error.hpp"

namespace oucd {

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
    if (v.id >= nodes_.size()) {
        throw ContractError("tape: variable " + std::to_string(v.id) + " was not recorded");
    }
    return nodes_[v.id];
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
    if (v.id >= nodes_.size()) {
        throw ContractError("tape: variable " + std::to_string(v.id) + " was not recorded");
    }
    return nodes_[v.id];
}

template <typename T>
Var Tape<T>::push(Tensor<T> value, bool requires_grad,
                  std::function<void(Tape&, const Tensor<T>&)> backprop) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && record_grad_;
    if (n.requires_grad) {
        n.backprop = std::move(backprop);
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
bool Tape<T>::any_requires(std::initializer_list<Var> vars) const {
    return std::any_of(vars.begin(), vars.end(), [&](Var v) { return node(v).requires_grad; });
}

template <typename T>
void Tape<T>::accumulate(Var v, Tensor<T> g) {
    Node& n = node(v);
    if (!n.requires_grad) {
        return;
    }
    const Tensor<T>& target_value = n.borrowed ? *n.borrowed : n.value;
    if (!(g.shape() == target_value.shape())) {
        throw ContractError("tape: gradient shape " + g.shape().str() + " does not match value " +
                            target_value.shape().str());
    }
    if (n.grad_sink) {
        auto dst = n.grad_sink->ensure_grad();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] += g.data()[i];
        }
        return;
    }
    if (!n.has_grad) {
        n.grad = std::move(g);
        n.has_grad = true;
        return;
    }
    auto dst = n.grad.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += g.data()[i];
    }
}

template <typename T>
Var Tape<T>::parameter(Tensor<T>& param) {
    Node n;
    n.borrowed = &param;
    n.grad_sink = record_grad_ ? &param : nullptr;
    n.requires_grad = record_grad_;
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::frozen(const Tensor<T>& value) {
    Node n;
    n.borrowed = &value;
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
    return push(std::move(value), false, nullptr);
}

template <typename T>
Var Tape<T>::input(Tensor<T> value) {
    return push(std::move(value), true, [](Tape&, const Tensor<T>&) {});
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var v) const {
    const Node& n = node(v);
    return n.borrowed ? *n.borrowed : n.value;
}

template <typename T>
const Tensor<T>& Tape<T>::grad(Var v) const {
    const Node& n = node(v);
    if (n.grad_sink) {
        throw ContractError("tape: parameter gradients live on the parameter tensor");
    }
    if (!n.has_grad) {
        throw ContractError("tape: variable " + std::to_string(v.id) + " has no gradient");
    }
    return n.grad;
}

template <typename T>
Var Tape<T>::conv2d(Var x, Var weight, Var bias, int stride, int padding) {
    Tensor<T> out = ops::conv2d(value(x), value(weight), value(bias), stride, padding);
    return push(std::move(out), any_requires({x, weight, bias}),
                [x, weight, bias, stride, padding](Tape& t, const Tensor<T>& g) {
                    auto grads =
                        ops::conv2d_backward(g, t.value(x), t.value(weight), stride, padding);
                    t.accumulate(x, std::move(grads.input));
                    t.accumulate(weight, std::move(grads.weight));
                    t.accumulate(bias, std::move(grads.bias));
                });
}

template <typename T>
Var Tape<T>::maxpool2(Var x) {
    auto pooled = ops::maxpool2(value(x));
    auto argmax = std::make_shared<ops::ArgmaxMap>(std::move(pooled.argmax));
    const Shape in_shape = value(x).shape();
    return push(std::move(pooled.output), any_requires({x}),
                [x, argmax, in_shape](Tape& t, const Tensor<T>& g) {
                    t.accumulate(x, ops::maxpool2_backward(g, *argmax, in_shape));
                });
}

template <typename T>
Var Tape<T>::resize(Var x, int out_h, int out_w) {
    const Shape in_shape = value(x).shape();
    return push(ops::bilinear_resize(value(x), out_h, out_w), any_requires({x}),
                [x, in_shape](Tape& t, const Tensor<T>& g) {
                    t.accumulate(x, ops::bilinear_resize_backward(g, in_shape));
                });
}

template <typename T>
Var Tape<T>::upsample2(Var x) {
    const Shape& s = value(x).shape();
    return resize(x, s.h * 2, s.w * 2);
}

template <typename T>
Var Tape<T>::downsample(Var x, int factor) {
    const Shape& s = value(x).shape();
    if (factor < 1 || s.h % factor != 0 || s.w % factor != 0) {
        throw ConfigError("downsample: factor " + std::to_string(factor) +
                          " does not divide " + s.str());
    }
    if (factor == 1) {
        return x;
    }
    return resize(x, s.h / factor, s.w / factor);
}

template <typename T>
Var Tape<T>::relu(Var x) {
    return push(ops::relu(value(x)), any_requires({x}), [x](Tape& t, const Tensor<T>& g) {
        t.accumulate(x, ops::relu_backward(g, t.value(x)));
    });
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
    return push(ops::add(value(a), value(b)), any_requires({a, b}),
                [a, b](Tape& t, const Tensor<T>& g) {
                    t.accumulate(a, g);
                    t.accumulate(b, g);
                });
}

template <typename T>
Var Tape<T>::mse(Var a, Var b) {
    const double loss = ops::mean_squared_error(value(a), value(b));
    return push(Tensor<T>(Shape{}, static_cast<T>(loss)), any_requires({a, b}),
                [a, b](Tape& t, const Tensor<T>& g) {
                    const T up = g.data()[0];
                    Tensor<T> da = ops::mean_squared_error_backward(t.value(a), t.value(b), up);
                    t.accumulate(a, da);
                    for (auto& v : da.data()) {
                        v = -v;
                    }
                    t.accumulate(b, std::move(da));
                });
}

template <typename T>
Var Tape<T>::sum(Var x) {
    double acc = 0.0;
    for (const T v : value(x).data()) {
        acc += v;
    }
    return push(Tensor<T>(Shape{}, static_cast<T>(acc)), any_requires({x}),
                [x](Tape& t, const Tensor<T>& g) {
                    t.accumulate(x, Tensor<T>(t.value(x).shape(), g.data()[0]));
                });
}

template <typename T>
Var Tape<T>::dot(Var x, const Tensor<T>& weights) {
    if (!(weights.shape() == value(x).shape())) {
        throw ContractError("dot: weight shape mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += static_cast<double>(value(x).data()[i]) * weights.data()[i];
    }
    return push(Tensor<T>(Shape{}, static_cast<T>(acc)), any_requires({x}),
                [x, weights](Tape& t, const Tensor<T>& g) {
                    Tensor<T> dx = weights;
                    for (auto& v : dx.data()) {
                        v *= g.data()[0];
                    }
                    t.accumulate(x, std::move(dx));
                });
}

template <typename T>
Var Tape<T>::scale(Var x, T factor) {
    Tensor<T> out = value(x);
    for (auto& v : out.data()) {
        v *= factor;
    }
    return push(std::move(out), any_requires({x}), [x, factor](Tape& t, const Tensor<T>& g) {
        Tensor<T> dx = g;
        for (auto& v : dx.data()) {
            v *= factor;
        }
        t.accumulate(x, std::move(dx));
    });
}

template <typename T>
void Tape<T>::backward(Var loss) {
    if (nodes_.empty() || loss.id >= nodes_.size()) {
        throw ContractError("backward called before any forward computation was recorded");
    }
    if (!record_grad_) {
        throw ContractError("backward called on a tape that does not record gradients");
    }
    if (consumed_) {
        throw ContractError("backward already ran on this tape");
    }
    if (value(loss).size() != 1) {
        throw ContractError("backward needs a scalar loss, got " + value(loss).shape().str());
    }
    consumed_ = true;
    if (!node(loss).requires_grad) {
        return;
    }
    accumulate(loss, Tensor<T>(Shape{}, T{1}));
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.has_grad || !n.backprop) {
            continue;
        }
        n.backprop(*this, n.grad);
    }
}

template class Tape<float>;
template class Tape<double>;

} // namespace oucd
