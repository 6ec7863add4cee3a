// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/gdn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "mae/kernels.hpp"

namespace mae {

template <class T>
GdnParams<T> gdn_init(std::size_t channels)
{
    GdnParams<T> p{Tensor<T>(Shape{channels}, T(1)), Tensor<T>(Shape{channels, channels})};
    for (std::size_t i = 0; i < channels; ++i) p.gamma[i * channels + i] = T(0.1);
    return p;
}

template <class T>
void gdn_project(GdnParams<T>& p)
{
    for (auto& b : p.beta.values()) b = std::max(b, static_cast<T>(kBetaFloor));
    for (auto& g : p.gamma.values()) g = std::max(g, T(0));
}

namespace {

template <class T>
Var<T> normalize(const Var<T>& x, const GdnSlots<Var<T>>& p, bool inverse)
{
    const Shape& xs = x.shape();
    if (xs.size() != 4) throw ContractViolation("gdn expects NCHW input, got " + shape_str(xs));
    const std::size_t batch = xs[0];
    const std::size_t ch = xs[1];
    const std::size_t plane = xs[2] * xs[3];
    const std::size_t cols = batch * plane;
    if (p.beta.value().size() != ch || p.gamma.shape() != Shape{ch, ch}) {
        throw ContractViolation("gdn channel mismatch: input has " + std::to_string(ch) +
                                " channels, params beta " + shape_str(p.beta.shape()) +
                                " gamma " + shape_str(p.gamma.shape()));
    }

    // Work in [C, N*H*W] layout so the cross-channel sum is one GEMM.
    auto xr = std::make_shared<Tensor<T>>(Shape{ch, cols});
    kernels::nchw_to_rows(batch, ch, plane, x.value().data(), xr->data());
    auto x2 = std::make_shared<Tensor<T>>(Shape{ch, cols});
    for (std::size_t i = 0; i < x2->size(); ++i) (*x2)[i] = (*xr)[i] * (*xr)[i];
    auto norm = std::make_shared<Tensor<T>>(Shape{ch, cols});
    for (std::size_t c = 0; c < ch; ++c)
        std::fill_n(norm->data() + c * cols, cols, p.beta.value()[c]);
    kernels::gemm(ch, cols, ch, p.gamma.value().data(), x2->data(), norm->data(), true);
    for (auto& s : norm->values()) s = std::sqrt(s);  // norm now holds sqrt(S)

    Tensor<T> yr(Shape{ch, cols});
    for (std::size_t i = 0; i < yr.size(); ++i)
        yr[i] = inverse ? (*xr)[i] * (*norm)[i] : (*xr)[i] / (*norm)[i];
    Tensor<T> y(xs);
    kernels::rows_to_nchw(batch, ch, plane, yr.data(), y.data());

    const Var<T> beta = p.beta;
    const Var<T> gamma = p.gamma;
    return x.tape().record(
        std::move(y), {x, beta, gamma},
        [x, beta, gamma, xr, x2, norm, inverse, batch, ch, plane,
         cols](Tape<T>& tape, const Tensor<T>& gout) {
            Tensor<T> gr(Shape{ch, cols});
            kernels::nchw_to_rows(batch, ch, plane, gout.data(), gr.data());
            // t = dL/dS per element; direct = dL/dx through the explicit x factor.
            Tensor<T> t(Shape{ch, cols});
            Tensor<T> direct(Shape{ch, cols});
            for (std::size_t i = 0; i < t.size(); ++i) {
                const T r = (*norm)[i];
                if (inverse) {
                    direct[i] = gr[i] * r;
                    t[i] = gr[i] * (*xr)[i] * T(0.5) / r;
                } else {
                    direct[i] = gr[i] / r;
                    t[i] = -gr[i] * (*xr)[i] * T(0.5) / (r * r * r);
                }
            }
            if (beta.requires_grad()) {
                Tensor<T>& gb = tape.grad_buffer(beta);
                for (std::size_t c = 0; c < ch; ++c) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) acc += t[c * cols + j];
                    gb[c] += static_cast<T>(acc);
                }
            }
            if (gamma.requires_grad()) {
                Tensor<T> x2t(Shape{cols, ch});
                kernels::transpose(ch, cols, x2->data(), x2t.data());
                kernels::gemm(ch, ch, cols, t.data(), x2t.data(), tape.grad_buffer(gamma).data(),
                              true);
            }
            if (x.requires_grad()) {
                Tensor<T> gt(Shape{ch, ch});
                kernels::transpose(ch, ch, gamma.value().data(), gt.data());
                Tensor<T> back(Shape{ch, cols});
                kernels::gemm(ch, cols, ch, gt.data(), t.data(), back.data(), false);
                for (std::size_t i = 0; i < back.size(); ++i)
                    back[i] = direct[i] + T(2) * (*xr)[i] * back[i];
                Tensor<T> gx(x.shape());
                kernels::rows_to_nchw(batch, ch, plane, back.data(), gx.data());
                Tensor<T>& dst = tape.grad_buffer(x);
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gx[i];
            }
        });
}

} // namespace

template <class T>
Var<T> gdn_forward(const Var<T>& x, const GdnSlots<Var<T>>& p)
{
    return normalize(x, p, false);
}

template <class T>
Var<T> igdn_forward(const Var<T>& x, const GdnSlots<Var<T>>& p)
{
    return normalize(x, p, true);
}

template GdnParams<float> gdn_init<float>(std::size_t);
template GdnParams<double> gdn_init<double>(std::size_t);
template void gdn_project<float>(GdnParams<float>&);
template void gdn_project<double>(GdnParams<double>&);
template Var<float> gdn_forward<float>(const Var<float>&, const GdnSlots<Var<float>>&);
template Var<double> gdn_forward<double>(const Var<double>&, const GdnSlots<Var<double>>&);
template Var<float> igdn_forward<float>(const Var<float>&, const GdnSlots<Var<float>>&);
template Var<double> igdn_forward<double>(const Var<double>&, const GdnSlots<Var<double>>&);

} // namespace mae
