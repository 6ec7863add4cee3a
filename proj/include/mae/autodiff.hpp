// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tape-based reverse-mode differentiation over dense tensors.
//
// A Tape records every primitive executed on its Vars. Calling backward()
// on a scalar Var replays the record in reverse, accumulating exactly one
// gradient per requires_grad node. Tapes are single-use: backward() may be
// called once, and a tape is confined to the thread that built it.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "mae/tensor.hpp"

namespace mae {

template <class T>
class Tape;

/// Handle to a node on a Tape.
template <class T>
class Var {
public:
    Var() = default;
    Var(Tape<T>* tape, std::uint32_t id) : tape_(tape), id_(id) {}

    bool valid() const noexcept { return tape_ != nullptr; }
    Tape<T>& tape() const { return *tape_; }
    std::uint32_t id() const noexcept { return id_; }
    const Tensor<T>& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;

private:
    Tape<T>* tape_ = nullptr;
    std::uint32_t id_ = 0;
};

template <class T>
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const Tensor<T>& grad_out)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf owning its value.
    Var<T> leaf(Tensor<T> value, bool requires_grad = true);
    Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }
    /// Leaf referencing external storage, which must outlive the tape.
    Var<T> borrow(const Tensor<T>& value, bool requires_grad = true);

    /// Appends a computed node. `backward` is dropped when no parent
    /// requires a gradient.
    Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> parents, BackwardFn backward);

    const Tensor<T>& value(const Var<T>& v) const { return nodes_[v.id()].get(); }
    bool requires_grad(const Var<T>& v) const { return nodes_[v.id()].requires_grad; }

    /// Mutable gradient buffer, zero-initialized on first use.
    Tensor<T>& grad_buffer(const Var<T>& v);

    /// dLoss/dv after backward(); exactly zero for nodes the loss never reached.
    Tensor<T> grad(const Var<T>& v) const;

    void backward(const Var<T>& loss);

    std::size_t node_count() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor<T> owned;
        const Tensor<T>* borrowed = nullptr;
        Tensor<T> grad;
        bool has_grad = false;
        bool requires_grad = false;
        BackwardFn backward;

        const Tensor<T>& get() const { return borrowed ? *borrowed : owned; }
    };

    std::deque<Node> nodes_;
    bool consumed_ = false;
};

template <class T>
const Tensor<T>& Var<T>::value() const
{
    return tape_->value(*this);
}

template <class T>
bool Var<T>::requires_grad() const
{
    return tape_->requires_grad(*this);
}

namespace ad {

enum class Unary { relu, exp, log2, square, sqrt, neg };
enum class Binary { add, sub, mul, div };
enum class Reduction { sum, mean };

/// Cross-correlation of NCHW input with [O, I, K, K] kernel, zero padding.
template <class T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernel, std::size_t stride, std::size_t pad);

/// Adjoint of conv2d as a forward map. Kernel is [I, O, K, K] (input
/// channels first). Output extent is (H-1)*stride - 2*pad + K + output_pad.
template <class T>
Var<T> conv2d_transpose(const Var<T>& input, const Var<T>& kernel, std::size_t stride,
                        std::size_t pad, std::size_t output_pad);

/// y[B,m] = x[B,n] W[n,m] + b[m]
template <class T>
Var<T> affine(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <class T>
Var<T> pointwise(Unary kind, const Var<T>& x);

/// Equal shapes, or either operand holding a single element.
template <class T>
Var<T> pointwise(Binary kind, const Var<T>& a, const Var<T>& b);

/// Reduces the listed axes (all axes when empty); reduced axes are dropped.
template <class T>
Var<T> reduce(Reduction kind, const Var<T>& x, std::vector<std::size_t> axes = {});

/// x[n,c,h,w] * v[c]
template <class T>
Var<T> channel_scale(const Var<T>& x, const Var<T>& v);

/// x[n,c,h,w] + b[c]
template <class T>
Var<T> channel_bias(const Var<T>& x, const Var<T>& b);

template <class T>
Var<T> reshape(const Var<T>& x, Shape shape);

template <class T>
Var<T> relu(const Var<T>& x) { return pointwise(Unary::relu, x); }
template <class T>
Var<T> exp(const Var<T>& x) { return pointwise(Unary::exp, x); }
template <class T>
Var<T> log2(const Var<T>& x) { return pointwise(Unary::log2, x); }
template <class T>
Var<T> square(const Var<T>& x) { return pointwise(Unary::square, x); }
template <class T>
Var<T> sqrt(const Var<T>& x) { return pointwise(Unary::sqrt, x); }
template <class T>
Var<T> neg(const Var<T>& x) { return pointwise(Unary::neg, x); }
template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) { return pointwise(Binary::add, a, b); }
template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) { return pointwise(Binary::sub, a, b); }
template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) { return pointwise(Binary::mul, a, b); }
template <class T>
Var<T> div(const Var<T>& a, const Var<T>& b) { return pointwise(Binary::div, a, b); }
template <class T>
Var<T> sum(const Var<T>& x) { return reduce(Reduction::sum, x); }
template <class T>
Var<T> mean(const Var<T>& x) { return reduce(Reduction::mean, x); }

template <class T>
Var<T> scalar(Tape<T>& tape, T value)
{
    return tape.constant(Tensor<T>(Shape{}, value));
}

} // namespace ad

/// Scalar-valued program over a fresh tape; inputs arrive as requires_grad leaves.
using TapeProgram =
    std::function<Var<double>(Tape<double>&, std::span<const Var<double>> inputs)>;

/// Gradients below this magnitude are compared absolutely: central
/// differences at eps 1e-4 carry roughly 1e-12 |f| of rounding noise.
inline constexpr double kGradCheckFloor = 1e-6;

/// Max over all input coordinates of |analytic - central difference| /
/// max(|analytic|, |central difference|, kGradCheckFloor).
double grad_check(const TapeProgram& fn, const std::vector<Tensor<double>>& inputs,
                  double eps = 1e-4);

/// As grad_check, probing at most `max_coords` coordinates per input
/// (chosen with a seeded shuffle) when an input is larger than that.
double grad_check_sampled(const TapeProgram& fn, const std::vector<Tensor<double>>& inputs,
                          double eps, std::size_t max_coords, std::uint64_t seed);

} // namespace mae
