// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include "mae/kernels.hpp"

namespace mae {

std::size_t shape_size(const Shape& shape)
{
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

// ---------------------------------------------------------------------------
// Tape

template <class T>
Var<T> Tape<T>::leaf(Tensor<T> value, bool requires_grad)
{
    Node node;
    node.owned = std::move(value);
    node.requires_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
Var<T> Tape<T>::borrow(const Tensor<T>& value, bool requires_grad)
{
    Node node;
    node.borrowed = &value;
    node.requires_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
Var<T> Tape<T>::record(Tensor<T> value, std::initializer_list<Var<T>> parents, BackwardFn backward)
{
    Node node;
    node.owned = std::move(value);
    for (const auto& p : parents) {
        if (p.requires_grad()) node.requires_grad = true;
    }
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
Tensor<T>& Tape<T>::grad_buffer(const Var<T>& v)
{
    Node& node = nodes_[v.id()];
    if (!node.has_grad) {
        node.grad = Tensor<T>(node.get().shape());
        node.has_grad = true;
    }
    return node.grad;
}

template <class T>
Tensor<T> Tape<T>::grad(const Var<T>& v) const
{
    const Node& node = nodes_[v.id()];
    if (node.has_grad) return node.grad;
    return Tensor<T>(node.get().shape());
}

template <class T>
void Tape<T>::backward(const Var<T>& loss)
{
    if (consumed_) throw ContractViolation("tape already replayed; tapes are single-use");
    if (loss.value().size() != 1) {
        throw ContractViolation("backward requires a scalar loss, got shape " +
                                shape_str(loss.shape()));
    }
    consumed_ = true;
    if (!requires_grad(loss)) return;
    grad_buffer(loss).fill(T(1));
    for (std::int64_t i = loss.id(); i >= 0; --i) {
        Node& node = nodes_[static_cast<std::size_t>(i)];
        if (node.has_grad && node.backward) node.backward(*this, node.grad);
    }
}

template class Tape<float>;
template class Tape<double>;

namespace ad {

namespace {

template <class T>
void require_rank(const Var<T>& v, std::size_t rank, const char* what)
{
    if (v.value().rank() != rank) {
        throw ContractViolation(std::string(what) + " expects rank " + std::to_string(rank) +
                                ", got shape " + shape_str(v.shape()));
    }
}

template <class T>
void add_into(Tensor<T>& dst, const Tensor<T>& src)
{
    T* d = dst.data();
    const T* s = src.data();
    const std::size_t n = dst.size();
#pragma omp parallel for simd schedule(static)
    for (std::size_t i = 0; i < n; ++i) d[i] += s[i];
}

} // namespace

// ---------------------------------------------------------------------------
// Convolutions

template <class T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernel, std::size_t stride, std::size_t pad)
{
    require_rank(input, 4, "conv2d input");
    require_rank(kernel, 4, "conv2d kernel");
    const Shape& xs = input.shape();
    const Shape& ks = kernel.shape();
    if (ks[2] != ks[3]) throw ContractViolation("conv2d kernel must be square, got " + shape_str(ks));
    if (xs[1] != ks[1]) {
        throw ContractViolation("conv2d channel mismatch: input channels " + std::to_string(xs[1]) +
                                " vs kernel input extent " + std::to_string(ks[1]));
    }
    if (stride == 0) throw ContractViolation("conv2d stride must be positive");
    if (xs[2] + 2 * pad < ks[2] || xs[3] + 2 * pad < ks[3]) {
        throw ContractViolation("conv2d input " + shape_str(xs) + " with padding " +
                                std::to_string(pad) + " is smaller than kernel " + shape_str(ks));
    }

    kernels::ConvGeometry g;
    g.batch = xs[0];
    g.channels = xs[1];
    g.height = xs[2];
    g.width = xs[3];
    g.kernel = ks[2];
    g.stride = stride;
    g.pad = pad;
    g.out_h = (xs[2] + 2 * pad - ks[2]) / stride + 1;
    g.out_w = (xs[3] + 2 * pad - ks[3]) / stride + 1;
    const std::size_t out_ch = ks[0];
    const std::size_t plane = g.out_h * g.out_w;

    auto col = std::make_shared<Tensor<T>>(Shape{g.col_rows(), g.col_cols()});
    kernels::im2col(g, input.value().data(), col->data());
    Tensor<T> rows(Shape{out_ch, g.col_cols()});
    kernels::gemm(out_ch, g.col_cols(), g.col_rows(), kernel.value().data(), col->data(),
                  rows.data(), false);
    Tensor<T> out(Shape{g.batch, out_ch, g.out_h, g.out_w});
    kernels::rows_to_nchw(g.batch, out_ch, plane, rows.data(), out.data());

    return input.tape().record(
        std::move(out), {input, kernel},
        [input, kernel, g, col, out_ch, plane](Tape<T>& tape, const Tensor<T>& gout) {
            Tensor<T> grows(Shape{out_ch, g.col_cols()});
            kernels::nchw_to_rows(g.batch, out_ch, plane, gout.data(), grows.data());
            if (kernel.requires_grad()) {
                Tensor<T> colt(Shape{g.col_cols(), g.col_rows()});
                kernels::transpose(g.col_rows(), g.col_cols(), col->data(), colt.data());
                kernels::gemm(out_ch, g.col_rows(), g.col_cols(), grows.data(), colt.data(),
                              tape.grad_buffer(kernel).data(), true);
            }
            if (input.requires_grad()) {
                Tensor<T> wt(Shape{g.col_rows(), out_ch});
                kernels::transpose(out_ch, g.col_rows(), kernel.value().data(), wt.data());
                Tensor<T> gcol(Shape{g.col_rows(), g.col_cols()});
                kernels::gemm(g.col_rows(), g.col_cols(), out_ch, wt.data(), grows.data(),
                              gcol.data(), false);
                kernels::col2im(g, gcol.data(), tape.grad_buffer(input).data());
            }
        });
}

template <class T>
Var<T> conv2d_transpose(const Var<T>& input, const Var<T>& kernel, std::size_t stride,
                        std::size_t pad, std::size_t output_pad)
{
    require_rank(input, 4, "conv2d_transpose input");
    require_rank(kernel, 4, "conv2d_transpose kernel");
    const Shape& xs = input.shape();
    const Shape& ks = kernel.shape();
    if (ks[2] != ks[3]) {
        throw ContractViolation("conv2d_transpose kernel must be square, got " + shape_str(ks));
    }
    if (xs[1] != ks[0]) {
        throw ContractViolation("conv2d_transpose channel mismatch: input channels " +
                                std::to_string(xs[1]) + " vs kernel input extent " +
                                std::to_string(ks[0]));
    }
    if (stride == 0) throw ContractViolation("conv2d_transpose stride must be positive");
    if (output_pad >= stride) {
        throw ContractViolation("conv2d_transpose output_pad " + std::to_string(output_pad) +
                                " must be smaller than stride " + std::to_string(stride));
    }
    const std::size_t k = ks[2];
    if ((xs[2] - 1) * stride + k + output_pad <= 2 * pad ||
        (xs[3] - 1) * stride + k + output_pad <= 2 * pad) {
        throw ContractViolation("conv2d_transpose padding " + std::to_string(pad) +
                                " leaves no output for input " + shape_str(xs));
    }

    // Geometry of the forward convolution this operator is the adjoint of.
    kernels::ConvGeometry g;
    g.batch = xs[0];
    g.channels = ks[1];
    g.height = (xs[2] - 1) * stride + k + output_pad - 2 * pad;
    g.width = (xs[3] - 1) * stride + k + output_pad - 2 * pad;
    g.kernel = k;
    g.stride = stride;
    g.pad = pad;
    g.out_h = xs[2];
    g.out_w = xs[3];
    const std::size_t in_ch = ks[0];
    const std::size_t plane = g.out_h * g.out_w;

    auto xrows = std::make_shared<Tensor<T>>(Shape{in_ch, g.col_cols()});
    kernels::nchw_to_rows(g.batch, in_ch, plane, input.value().data(), xrows->data());
    Tensor<T> kt(Shape{g.col_rows(), in_ch});
    kernels::transpose(in_ch, g.col_rows(), kernel.value().data(), kt.data());
    Tensor<T> col(Shape{g.col_rows(), g.col_cols()});
    kernels::gemm(g.col_rows(), g.col_cols(), in_ch, kt.data(), xrows->data(), col.data(), false);
    Tensor<T> out(Shape{g.batch, g.channels, g.height, g.width});
    kernels::col2im(g, col.data(), out.data());

    return input.tape().record(
        std::move(out), {input, kernel},
        [input, kernel, g, xrows, in_ch, plane](Tape<T>& tape, const Tensor<T>& gout) {
            Tensor<T> gcol(Shape{g.col_rows(), g.col_cols()});
            kernels::im2col(g, gout.data(), gcol.data());
            if (input.requires_grad()) {
                Tensor<T> gx(Shape{in_ch, g.col_cols()});
                kernels::gemm(in_ch, g.col_cols(), g.col_rows(), kernel.value().data(),
                              gcol.data(), gx.data(), false);
                Tensor<T> gnchw(input.shape());
                kernels::rows_to_nchw(g.batch, in_ch, plane, gx.data(), gnchw.data());
                add_into(tape.grad_buffer(input), gnchw);
            }
            if (kernel.requires_grad()) {
                Tensor<T> gcolt(Shape{g.col_cols(), g.col_rows()});
                kernels::transpose(g.col_rows(), g.col_cols(), gcol.data(), gcolt.data());
                kernels::gemm(in_ch, g.col_rows(), g.col_cols(), xrows->data(), gcolt.data(),
                              tape.grad_buffer(kernel).data(), true);
            }
        });
}

// ---------------------------------------------------------------------------
// Dense

template <class T>
Var<T> affine(const Var<T>& x, const Var<T>& weight, const Var<T>& bias)
{
    require_rank(x, 2, "affine input");
    require_rank(weight, 2, "affine weight");
    const std::size_t batch = x.shape()[0];
    const std::size_t n = x.shape()[1];
    const std::size_t m = weight.shape()[1];
    if (weight.shape()[0] != n) {
        throw ContractViolation("affine inner extent mismatch: input " + shape_str(x.shape()) +
                                " vs weight " + shape_str(weight.shape()));
    }
    if (bias.value().size() != m) {
        throw ContractViolation("affine bias extent " + std::to_string(bias.value().size()) +
                                " does not match output extent " + std::to_string(m));
    }
    Tensor<T> out(Shape{batch, m});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t j = 0; j < m; ++j) out[b * m + j] = bias.value()[j];
    kernels::gemm(batch, m, n, x.value().data(), weight.value().data(), out.data(), true);

    return x.tape().record(
        std::move(out), {x, weight, bias},
        [x, weight, bias, batch, n, m](Tape<T>& tape, const Tensor<T>& gout) {
            if (x.requires_grad()) {
                Tensor<T> wt(Shape{m, n});
                kernels::transpose(n, m, weight.value().data(), wt.data());
                kernels::gemm(batch, n, m, gout.data(), wt.data(), tape.grad_buffer(x).data(),
                              true);
            }
            if (weight.requires_grad()) {
                Tensor<T> xt(Shape{n, batch});
                kernels::transpose(batch, n, x.value().data(), xt.data());
                kernels::gemm(n, m, batch, xt.data(), gout.data(),
                              tape.grad_buffer(weight).data(), true);
            }
            if (bias.requires_grad()) {
                auto& gb = tape.grad_buffer(bias);
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t j = 0; j < m; ++j) gb[j] += gout[b * m + j];
            }
        });
}

// ---------------------------------------------------------------------------
// Elementwise

template <class T>
Var<T> pointwise(Unary kind, const Var<T>& x)
{
    const Tensor<T>& xv = x.value();
    Tensor<T> out(xv.shape());
    const std::size_t n = xv.size();
    if (kind == Unary::log2 || kind == Unary::sqrt) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(xv[i] > T(0))) {
                throw NumericDomainError(std::string(kind == Unary::log2 ? "log2" : "sqrt") +
                                         " requires positive input; element " + std::to_string(i) +
                                         " is " + std::to_string(xv[i]));
            }
        }
    }
    switch (kind) {
    case Unary::relu:
        for (std::size_t i = 0; i < n; ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
        break;
    case Unary::exp:
        for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(xv[i]);
        break;
    case Unary::log2:
        for (std::size_t i = 0; i < n; ++i) out[i] = std::log2(xv[i]);
        break;
    case Unary::square:
        for (std::size_t i = 0; i < n; ++i) out[i] = xv[i] * xv[i];
        break;
    case Unary::sqrt:
        for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(xv[i]);
        break;
    case Unary::neg:
        for (std::size_t i = 0; i < n; ++i) out[i] = -xv[i];
        break;
    }

    auto result = std::make_shared<Var<T>>();
    Var<T> v = x.tape().record(
        std::move(out), {x}, [x, kind, result](Tape<T>& tape, const Tensor<T>& g) {
            const Tensor<T>& xv = x.value();
            const Tensor<T>& yv = result->value();
            Tensor<T>& gx = tape.grad_buffer(x);
            const std::size_t n = xv.size();
            switch (kind) {
            case Unary::relu:
                for (std::size_t i = 0; i < n; ++i) gx[i] += xv[i] > T(0) ? g[i] : T(0);
                break;
            case Unary::exp:
                for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * yv[i];
                break;
            case Unary::log2:
                for (std::size_t i = 0; i < n; ++i)
                    gx[i] += g[i] / (xv[i] * static_cast<T>(M_LN2));
                break;
            case Unary::square:
                for (std::size_t i = 0; i < n; ++i) gx[i] += T(2) * xv[i] * g[i];
                break;
            case Unary::sqrt:
                for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] / (T(2) * yv[i]);
                break;
            case Unary::neg:
                for (std::size_t i = 0; i < n; ++i) gx[i] -= g[i];
                break;
            }
        });
    *result = v;
    return v;
}

template <class T>
Var<T> pointwise(Binary kind, const Var<T>& a, const Var<T>& b)
{
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    const bool same = av.shape() == bv.shape();
    const bool b_scalar = !same && bv.size() == 1;
    const bool a_scalar = !same && !b_scalar && av.size() == 1;
    if (!same && !a_scalar && !b_scalar) {
        throw ContractViolation("pointwise operands must share a shape or be scalar: " +
                                shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
    }
    const Shape out_shape = a_scalar ? bv.shape() : av.shape();
    const std::size_t n = shape_size(out_shape);
    const std::size_t sa = a_scalar ? 0 : 1;
    const std::size_t sb = b_scalar ? 0 : 1;
    if (kind == Binary::div) {
        for (std::size_t i = 0; i < n; ++i) {
            if (bv[i * sb] == T(0)) {
                throw NumericDomainError("div by zero at divisor element " +
                                         std::to_string(i * sb));
            }
        }
    }
    Tensor<T> out(out_shape);
    for (std::size_t i = 0; i < n; ++i) {
        const T x = av[i * sa];
        const T y = bv[i * sb];
        switch (kind) {
        case Binary::add: out[i] = x + y; break;
        case Binary::sub: out[i] = x - y; break;
        case Binary::mul: out[i] = x * y; break;
        case Binary::div: out[i] = x / y; break;
        }
    }
    return a.tape().record(
        std::move(out), {a, b}, [a, b, kind, sa, sb, n](Tape<T>& tape, const Tensor<T>& g) {
            const Tensor<T>& av = a.value();
            const Tensor<T>& bv = b.value();
            if (a.requires_grad()) {
                Tensor<T>& ga = tape.grad_buffer(a);
                for (std::size_t i = 0; i < n; ++i) {
                    T d = g[i];
                    if (kind == Binary::mul) d *= bv[i * sb];
                    if (kind == Binary::div) d /= bv[i * sb];
                    ga[i * sa] += d;
                }
            }
            if (b.requires_grad()) {
                Tensor<T>& gb = tape.grad_buffer(b);
                for (std::size_t i = 0; i < n; ++i) {
                    T d = g[i];
                    switch (kind) {
                    case Binary::add: break;
                    case Binary::sub: d = -d; break;
                    case Binary::mul: d *= av[i * sa]; break;
                    case Binary::div: d *= -av[i * sa] / (bv[i * sb] * bv[i * sb]); break;
                    }
                    gb[i * sb] += d;
                }
            }
        });
}

// ---------------------------------------------------------------------------
// Reductions and reshapes

template <class T>
Var<T> reduce(Reduction kind, const Var<T>& x, std::vector<std::size_t> axes)
{
    const Shape& xs = x.shape();
    const std::size_t rank = xs.size();
    std::vector<bool> reduced(rank, axes.empty());
    for (auto a : axes) {
        if (a >= rank) {
            throw ContractViolation("reduce axis " + std::to_string(a) + " invalid for shape " +
                                    shape_str(xs));
        }
        if (reduced[a]) throw ContractViolation("reduce axis " + std::to_string(a) + " repeated");
        reduced[a] = true;
    }
    Shape out_shape;
    for (std::size_t d = 0; d < rank; ++d)
        if (!reduced[d]) out_shape.push_back(xs[d]);

    // Output stride per input axis (0 for reduced axes).
    std::vector<std::size_t> ostride(rank, 0);
    {
        std::size_t s = 1;
        for (std::size_t d = rank; d-- > 0;) {
            if (!reduced[d]) {
                ostride[d] = s;
                s *= xs[d];
            }
        }
    }
    const std::size_t n = x.value().size();
    const std::size_t out_n = shape_size(out_shape);
    const std::size_t count = out_n ? n / std::max<std::size_t>(out_n, 1) : 0;
    auto out_index = std::make_shared<std::vector<std::size_t>>(n);
    {
        std::vector<std::size_t> idx(rank, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t o = 0;
            for (std::size_t d = 0; d < rank; ++d) o += idx[d] * ostride[d];
            (*out_index)[i] = o;
            for (std::size_t d = rank; d-- > 0;) {
                if (++idx[d] < xs[d]) break;
                idx[d] = 0;
            }
        }
    }
    std::vector<double> acc(out_n, 0.0);
    const Tensor<T>& xv = x.value();
    for (std::size_t i = 0; i < n; ++i) acc[(*out_index)[i]] += static_cast<double>(xv[i]);
    Tensor<T> out(out_shape);
    const double scale = kind == Reduction::mean && count ? 1.0 / static_cast<double>(count) : 1.0;
    for (std::size_t o = 0; o < out_n; ++o) out[o] = static_cast<T>(acc[o] * scale);

    return x.tape().record(std::move(out), {x},
                           [x, out_index, scale](Tape<T>& tape, const Tensor<T>& g) {
                               Tensor<T>& gx = tape.grad_buffer(x);
                               const auto s = static_cast<T>(scale);
                               for (std::size_t i = 0; i < gx.size(); ++i)
                                   gx[i] += g[(*out_index)[i]] * s;
                           });
}

template <class T>
Var<T> reshape(const Var<T>& x, Shape shape)
{
    if (shape_size(shape) != x.value().size()) {
        throw ContractViolation("reshape " + shape_str(x.shape()) + " -> " + shape_str(shape) +
                                " changes element count");
    }
    return x.tape().record(x.value().reshaped(std::move(shape)), {x},
                           [x](Tape<T>& tape, const Tensor<T>& g) {
                               add_into(tape.grad_buffer(x), g.reshaped(x.shape()));
                           });
}

// ---------------------------------------------------------------------------
// Channel broadcasts

template <class T>
Var<T> channel_scale(const Var<T>& x, const Var<T>& v)
{
    if (x.value().rank() < 2) throw ContractViolation("channel_scale needs [N, C, ...] input");
    const Shape& xs = x.shape();
    const std::size_t batch = xs[0];
    const std::size_t ch = xs[1];
    const std::size_t plane = x.value().size() / (batch * ch);
    if (v.value().size() != ch) {
        throw ContractViolation("channel_scale vector extent " + std::to_string(v.value().size()) +
                                " does not match channel count " + std::to_string(ch));
    }
    Tensor<T> out(xs);
    const Tensor<T>& xv = x.value();
    const Tensor<T>& vv = v.value();
    for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t base = (n * ch + c) * plane;
            const T s = vv[c];
            for (std::size_t i = 0; i < plane; ++i) out[base + i] = xv[base + i] * s;
        }
    return x.tape().record(
        std::move(out), {x, v}, [x, v, batch, ch, plane](Tape<T>& tape, const Tensor<T>& g) {
            const Tensor<T>& xv = x.value();
            const Tensor<T>& vv = v.value();
            if (x.requires_grad()) {
                Tensor<T>& gx = tape.grad_buffer(x);
                for (std::size_t n = 0; n < batch; ++n)
                    for (std::size_t c = 0; c < ch; ++c) {
                        const std::size_t base = (n * ch + c) * plane;
                        for (std::size_t i = 0; i < plane; ++i) gx[base + i] += g[base + i] * vv[c];
                    }
            }
            if (v.requires_grad()) {
                Tensor<T>& gv = tape.grad_buffer(v);
                for (std::size_t c = 0; c < ch; ++c) {
                    double acc = 0.0;
                    for (std::size_t n = 0; n < batch; ++n) {
                        const std::size_t base = (n * ch + c) * plane;
                        for (std::size_t i = 0; i < plane; ++i)
                            acc += static_cast<double>(g[base + i]) * xv[base + i];
                    }
                    gv[c] += static_cast<T>(acc);
                }
            }
        });
}

template <class T>
Var<T> channel_bias(const Var<T>& x, const Var<T>& b)
{
    if (x.value().rank() < 2) throw ContractViolation("channel_bias needs [N, C, ...] input");
    const Shape& xs = x.shape();
    const std::size_t batch = xs[0];
    const std::size_t ch = xs[1];
    const std::size_t plane = x.value().size() / (batch * ch);
    if (b.value().size() != ch) {
        throw ContractViolation("channel_bias extent " + std::to_string(b.value().size()) +
                                " does not match channel count " + std::to_string(ch));
    }
    Tensor<T> out = x.value();
    for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t base = (n * ch + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) out[base + i] += b.value()[c];
        }
    return x.tape().record(
        std::move(out), {x, b}, [x, b, batch, ch, plane](Tape<T>& tape, const Tensor<T>& g) {
            if (x.requires_grad()) add_into(tape.grad_buffer(x), g);
            if (b.requires_grad()) {
                Tensor<T>& gb = tape.grad_buffer(b);
                for (std::size_t c = 0; c < ch; ++c) {
                    double acc = 0.0;
                    for (std::size_t n = 0; n < batch; ++n) {
                        const std::size_t base = (n * ch + c) * plane;
                        for (std::size_t i = 0; i < plane; ++i) acc += g[base + i];
                    }
                    gb[c] += static_cast<T>(acc);
                }
            }
        });
}

#define MAE_INSTANTIATE(T)                                                                      \
    template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, std::size_t, std::size_t);          \
    template Var<T> conv2d_transpose<T>(const Var<T>&, const Var<T>&, std::size_t, std::size_t, \
                                        std::size_t);                                           \
    template Var<T> affine<T>(const Var<T>&, const Var<T>&, const Var<T>&);                     \
    template Var<T> pointwise<T>(Unary, const Var<T>&);                                         \
    template Var<T> pointwise<T>(Binary, const Var<T>&, const Var<T>&);                         \
    template Var<T> reduce<T>(Reduction, const Var<T>&, std::vector<std::size_t>);              \
    template Var<T> reshape<T>(const Var<T>&, Shape);                                           \
    template Var<T> channel_scale<T>(const Var<T>&, const Var<T>&);                             \
    template Var<T> channel_bias<T>(const Var<T>&, const Var<T>&);

MAE_INSTANTIATE(float)
MAE_INSTANTIATE(double)
#undef MAE_INSTANTIATE

} // namespace ad

// ---------------------------------------------------------------------------
// Finite-difference check

namespace {

double evaluate(const TapeProgram& fn, const std::vector<Tensor<double>>& inputs)
{
    Tape<double> tape;
    std::vector<Var<double>> vars;
    vars.reserve(inputs.size());
    for (const auto& t : inputs) vars.push_back(tape.borrow(t, false));
    return fn(tape, vars).value()[0];
}

double check(const TapeProgram& fn, const std::vector<Tensor<double>>& inputs, double eps,
             std::size_t max_coords, std::uint64_t seed)
{
    std::vector<Tensor<double>> analytic;
    {
        Tape<double> tape;
        std::vector<Var<double>> vars;
        for (const auto& t : inputs) vars.push_back(tape.borrow(t, true));
        Var<double> loss = fn(tape, vars);
        tape.backward(loss);
        for (const auto& v : vars) analytic.push_back(tape.grad(v));
    }

    std::mt19937_64 rng(seed);
    std::vector<Tensor<double>> probe = inputs;
    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::vector<std::size_t> coords(inputs[i].size());
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (coords.size() > max_coords) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(max_coords);
        }
        for (auto j : coords) {
            const double x0 = inputs[i][j];
            probe[i][j] = x0 + eps;
            const double fp = evaluate(fn, probe);
            probe[i][j] = x0 - eps;
            const double fm = evaluate(fn, probe);
            probe[i][j] = x0;
            const double numeric = (fp - fm) / (2.0 * eps);
            const double a = analytic[i][j];
            const double scale = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
            worst = std::max(worst, std::abs(a - numeric) / scale);
        }
    }
    return worst;
}

} // namespace

double grad_check(const TapeProgram& fn, const std::vector<Tensor<double>>& inputs, double eps)
{
    return check(fn, inputs, eps, static_cast<std::size_t>(-1), 0);
}

double grad_check_sampled(const TapeProgram& fn, const std::vector<Tensor<double>>& inputs,
                          double eps, std::size_t max_coords, std::uint64_t seed)
{
    return check(fn, inputs, eps, max_coords, seed);
}

} // namespace mae
