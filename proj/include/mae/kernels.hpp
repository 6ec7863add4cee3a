// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops. Every kernel in `mae::kernels` parallelizes
// with OpenMP over disjoint output elements and keeps a fixed per-element
// accumulation order, so results are bit-identical for any thread count.
// `mae::kernels::reference` holds straightforward serial versions used by
// the tests and the benchmark.

#pragma once

#include <cstddef>

namespace mae::kernels {

/// Geometry of a 2-D convolution over an NCHW batch.
struct ConvGeometry {
    std::size_t batch = 1;
    std::size_t channels = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t kernel = 1;
    std::size_t stride = 1;
    std::size_t pad = 0;
    std::size_t out_h = 1;
    std::size_t out_w = 1;

    std::size_t col_rows() const { return channels * kernel * kernel; }
    std::size_t col_cols() const { return batch * out_h * out_w; }
};

/// C[m,n] = (accumulate ? C : 0) + A[m,k] * B[k,n], all row-major.
template <class T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate);

/// dst[cols,rows] = src[rows,cols]^T
template <class T>
void transpose(std::size_t rows, std::size_t cols, const T* src, T* dst);

/// Unfolds an NCHW batch into col[C*K*K, N*Ho*Wo] with zero padding.
template <class T>
void im2col(const ConvGeometry& g, const T* x, T* col);

/// Adjoint of im2col: scatters col back and adds into an NCHW batch.
template <class T>
void col2im(const ConvGeometry& g, const T* col, T* x);

/// y[n,o,hw] = col-major GEMM result laid out as [O, N*HW] -> NCHW.
template <class T>
void rows_to_nchw(std::size_t batch, std::size_t channels, std::size_t plane, const T* rows,
                  T* nchw);

/// Inverse of rows_to_nchw.
template <class T>
void nchw_to_rows(std::size_t batch, std::size_t channels, std::size_t plane, const T* nchw,
                  T* rows);

namespace reference {

template <class T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate);

/// Direct nested-loop cross-correlation; kernel is [O, C, K, K].
template <class T>
void conv2d_direct(const ConvGeometry& g, std::size_t out_channels, const T* x, const T* w,
                   T* y);

template <class T>
void im2col(const ConvGeometry& g, const T* x, T* col);

} // namespace reference

} // namespace mae::kernels
