// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <cstring>

namespace mae::kernels {

namespace {

constexpr std::size_t kRowBlock = 4;

template <class T>
constexpr std::size_t col_block()
{
    return 256 / sizeof(T);
}

// One MR x NC tile of C. Accumulation order over k is ascending for every
// element, which is the same order the edge path and the reference use.
template <class T, std::size_t MR, std::size_t NC>
inline void tile_full(std::size_t n, std::size_t k, const T* a, const T* b, T* c)
{
    T acc[MR][NC];
    for (std::size_t r = 0; r < MR; ++r)
        for (std::size_t j = 0; j < NC; ++j) acc[r][j] = c[r * n + j];
    for (std::size_t p = 0; p < k; ++p) {
        const T* brow = b + p * n;
        for (std::size_t r = 0; r < MR; ++r) {
            const T ar = a[r * k + p];
#pragma omp simd
            for (std::size_t j = 0; j < NC; ++j) acc[r][j] += ar * brow[j];
        }
    }
    for (std::size_t r = 0; r < MR; ++r)
        for (std::size_t j = 0; j < NC; ++j) c[r * n + j] = acc[r][j];
}

template <class T>
inline void tile_edge(std::size_t rows, std::size_t cols, std::size_t n, std::size_t k,
                      const T* a, const T* b, T* c)
{
    for (std::size_t r = 0; r < rows; ++r) {
        T* crow = c + r * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T ar = a[r * k + p];
            const T* brow = b + p * n;
#pragma omp simd
            for (std::size_t j = 0; j < cols; ++j) crow[j] += ar * brow[j];
        }
    }
}

} // namespace

template <class T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate)
{
    if (!accumulate) std::fill(c, c + m * n, T(0));
    if (m == 0 || n == 0 || k == 0) return;
    constexpr std::size_t NC = col_block<T>();
    const auto row_blocks = static_cast<std::ptrdiff_t>((m + kRowBlock - 1) / kRowBlock);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ib = 0; ib < row_blocks; ++ib) {
        const std::size_t i0 = static_cast<std::size_t>(ib) * kRowBlock;
        const std::size_t rows = std::min(kRowBlock, m - i0);
        for (std::size_t j0 = 0; j0 < n; j0 += NC) {
            const std::size_t cols = std::min(NC, n - j0);
            if (rows == kRowBlock && cols == NC) {
                tile_full<T, kRowBlock, NC>(n, k, a + i0 * k, b + j0, c + i0 * n + j0);
            } else {
                tile_edge<T>(rows, cols, n, k, a + i0 * k, b + j0, c + i0 * n + j0);
            }
        }
    }
}

template <class T>
void transpose(std::size_t rows, std::size_t cols, const T* src, T* dst)
{
    constexpr std::size_t B = 32;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ib = 0; ib < static_cast<std::ptrdiff_t>((rows + B - 1) / B); ++ib) {
        const std::size_t i0 = static_cast<std::size_t>(ib) * B;
        const std::size_t i1 = std::min(rows, i0 + B);
        for (std::size_t j0 = 0; j0 < cols; j0 += B) {
            const std::size_t j1 = std::min(cols, j0 + B);
            for (std::size_t i = i0; i < i1; ++i)
                for (std::size_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
        }
    }
}

template <class T>
void im2col(const ConvGeometry& g, const T* x, T* col)
{
    const std::size_t plane = g.out_h * g.out_w;
    const std::size_t ncols = g.col_cols();
    const auto nrows = static_cast<std::ptrdiff_t>(g.col_rows());
    const auto ih = static_cast<std::ptrdiff_t>(g.height);
    const auto iw = static_cast<std::ptrdiff_t>(g.width);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t row = 0; row < nrows; ++row) {
        const std::size_t c = static_cast<std::size_t>(row) / (g.kernel * g.kernel);
        const std::size_t kh = (static_cast<std::size_t>(row) / g.kernel) % g.kernel;
        const std::size_t kw = static_cast<std::size_t>(row) % g.kernel;
        T* dst = col + static_cast<std::size_t>(row) * ncols;
        for (std::size_t n = 0; n < g.batch; ++n) {
            const T* src = x + (n * g.channels + c) * g.height * g.width;
            T* out = dst + n * plane;
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                const auto y = static_cast<std::ptrdiff_t>(oh * g.stride + kh) -
                               static_cast<std::ptrdiff_t>(g.pad);
                T* orow = out + oh * g.out_w;
                if (y < 0 || y >= ih) {
                    std::fill(orow, orow + g.out_w, T(0));
                    continue;
                }
                const T* srow = src + y * iw;
                for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                    const auto xx = static_cast<std::ptrdiff_t>(ow * g.stride + kw) -
                                    static_cast<std::ptrdiff_t>(g.pad);
                    orow[ow] = (xx >= 0 && xx < iw) ? srow[xx] : T(0);
                }
            }
        }
    }
}

template <class T>
void col2im(const ConvGeometry& g, const T* col, T* x)
{
    const std::size_t plane = g.out_h * g.out_w;
    const std::size_t ncols = g.col_cols();
    const auto ih = static_cast<std::ptrdiff_t>(g.height);
    const auto iw = static_cast<std::ptrdiff_t>(g.width);
    const auto work = static_cast<std::ptrdiff_t>(g.batch * g.channels);
    // Each (n, c) plane is owned by one thread; rows are visited in a fixed order.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t nc = 0; nc < work; ++nc) {
        const std::size_t n = static_cast<std::size_t>(nc) / g.channels;
        const std::size_t c = static_cast<std::size_t>(nc) % g.channels;
        T* dst = x + (n * g.channels + c) * g.height * g.width;
        for (std::size_t kh = 0; kh < g.kernel; ++kh) {
            for (std::size_t kw = 0; kw < g.kernel; ++kw) {
                const std::size_t row = (c * g.kernel + kh) * g.kernel + kw;
                const T* src = col + row * ncols + n * plane;
                for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                    const auto y = static_cast<std::ptrdiff_t>(oh * g.stride + kh) -
                                   static_cast<std::ptrdiff_t>(g.pad);
                    if (y < 0 || y >= ih) continue;
                    T* drow = dst + y * iw;
                    const T* srow = src + oh * g.out_w;
                    for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                        const auto xx = static_cast<std::ptrdiff_t>(ow * g.stride + kw) -
                                        static_cast<std::ptrdiff_t>(g.pad);
                        if (xx >= 0 && xx < iw) drow[xx] += srow[ow];
                    }
                }
            }
        }
    }
}

template <class T>
void rows_to_nchw(std::size_t batch, std::size_t channels, std::size_t plane, const T* rows,
                  T* nchw)
{
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(channels); ++c) {
        for (std::size_t n = 0; n < batch; ++n) {
            std::memcpy(nchw + (n * channels + static_cast<std::size_t>(c)) * plane,
                        rows + static_cast<std::size_t>(c) * batch * plane + n * plane,
                        plane * sizeof(T));
        }
    }
}

template <class T>
void nchw_to_rows(std::size_t batch, std::size_t channels, std::size_t plane, const T* nchw,
                  T* rows)
{
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(channels); ++c) {
        for (std::size_t n = 0; n < batch; ++n) {
            std::memcpy(rows + static_cast<std::size_t>(c) * batch * plane + n * plane,
                        nchw + (n * channels + static_cast<std::size_t>(c)) * plane,
                        plane * sizeof(T));
        }
    }
}

#define MAE_INSTANTIATE(T)                                                                    \
    template void gemm<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*, bool); \
    template void transpose<T>(std::size_t, std::size_t, const T*, T*);                       \
    template void im2col<T>(const ConvGeometry&, const T*, T*);                               \
    template void col2im<T>(const ConvGeometry&, const T*, T*);                               \
    template void rows_to_nchw<T>(std::size_t, std::size_t, std::size_t, const T*, T*);      \
    template void nchw_to_rows<T>(std::size_t, std::size_t, std::size_t, const T*, T*);

MAE_INSTANTIATE(float)
MAE_INSTANTIATE(double)
#undef MAE_INSTANTIATE

} // namespace mae::kernels
