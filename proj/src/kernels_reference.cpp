// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstddef>

#include "mae/kernels.hpp"

namespace mae::kernels::reference {

template <class T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate)
{
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T sum = accumulate ? c[i * n + j] : T(0);
            for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[p * n + j];
            c[i * n + j] = sum;
        }
    }
}

template <class T>
void conv2d_direct(const ConvGeometry& g, std::size_t out_channels, const T* x, const T* w,
                   T* y)
{
    const auto pad = static_cast<std::ptrdiff_t>(g.pad);
    for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t o = 0; o < out_channels; ++o)
            for (std::size_t oh = 0; oh < g.out_h; ++oh)
                for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                    T sum = 0;
                    for (std::size_t c = 0; c < g.channels; ++c)
                        for (std::size_t kh = 0; kh < g.kernel; ++kh)
                            for (std::size_t kw = 0; kw < g.kernel; ++kw) {
                                const auto iy = static_cast<std::ptrdiff_t>(oh * g.stride + kh) - pad;
                                const auto ix = static_cast<std::ptrdiff_t>(ow * g.stride + kw) - pad;
                                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.height) ||
                                    ix >= static_cast<std::ptrdiff_t>(g.width))
                                    continue;
                                sum += x[((n * g.channels + c) * g.height + static_cast<std::size_t>(iy)) *
                                             g.width +
                                         static_cast<std::size_t>(ix)] *
                                       w[((o * g.channels + c) * g.kernel + kh) * g.kernel + kw];
                            }
                    y[((n * out_channels + o) * g.out_h + oh) * g.out_w + ow] = sum;
                }
}

template <class T>
void im2col(const ConvGeometry& g, const T* x, T* col)
{
    const std::size_t ncols = g.col_cols();
    for (std::size_t c = 0; c < g.channels; ++c)
        for (std::size_t kh = 0; kh < g.kernel; ++kh)
            for (std::size_t kw = 0; kw < g.kernel; ++kw)
                for (std::size_t n = 0; n < g.batch; ++n)
                    for (std::size_t oh = 0; oh < g.out_h; ++oh)
                        for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                            const std::size_t row = (c * g.kernel + kh) * g.kernel + kw;
                            const std::size_t colidx = (n * g.out_h + oh) * g.out_w + ow;
                            const auto iy = static_cast<std::ptrdiff_t>(oh * g.stride + kh) -
                                            static_cast<std::ptrdiff_t>(g.pad);
                            const auto ix = static_cast<std::ptrdiff_t>(ow * g.stride + kw) -
                                            static_cast<std::ptrdiff_t>(g.pad);
                            const bool inside = iy >= 0 && ix >= 0 &&
                                                iy < static_cast<std::ptrdiff_t>(g.height) &&
                                                ix < static_cast<std::ptrdiff_t>(g.width);
                            col[row * ncols + colidx] =
                                inside ? x[((n * g.channels + c) * g.height + static_cast<std::size_t>(iy)) *
                                               g.width +
                                           static_cast<std::size_t>(ix)]
                                       : T(0);
                        }
}

template void gemm<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*,
                          bool);
template void gemm<double>(std::size_t, std::size_t, std::size_t, const double*, const double*,
                           double*, bool);
template void conv2d_direct<float>(const ConvGeometry&, std::size_t, const float*, const float*,
                                   float*);
template void conv2d_direct<double>(const ConvGeometry&, std::size_t, const double*, const double*,
                                    double*);
template void im2col<float>(const ConvGeometry&, const float*, float*);
template void im2col<double>(const ConvGeometry&, const double*, double*);

} // namespace mae::kernels::reference
