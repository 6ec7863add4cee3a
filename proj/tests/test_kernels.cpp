// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>

#include "mae/kernels.hpp"
#include "support/test_util.hpp"

using namespace mae;
using mae::testing::random_tensor;

namespace {

kernels::ConvGeometry geometry(std::size_t n, std::size_t c, std::size_t h, std::size_t w,
                               std::size_t k, std::size_t s, std::size_t p)
{
    kernels::ConvGeometry g;
    g.batch = n;
    g.channels = c;
    g.height = h;
    g.width = w;
    g.kernel = k;
    g.stride = s;
    g.pad = p;
    g.out_h = (h + 2 * p - k) / s + 1;
    g.out_w = (w + 2 * p - k) / s + 1;
    return g;
}

} // namespace

TEST(Kernels, GemmMatchesReferenceAcrossTileEdges)
{
    for (auto [m, n, k] : {std::tuple{1, 1, 1}, {4, 64, 3}, {5, 67, 9}, {33, 130, 17}, {8, 256, 40}}) {
        auto a = random_tensor<float>({std::size_t(m), std::size_t(k)}, 1);
        auto b = random_tensor<float>({std::size_t(k), std::size_t(n)}, 2);
        auto c0 = random_tensor<float>({std::size_t(m), std::size_t(n)}, 3);
        auto c1 = c0;
        kernels::gemm<float>(m, n, k, a.data(), b.data(), c0.data(), true);
        kernels::reference::gemm<float>(m, n, k, a.data(), b.data(), c1.data(), true);
        for (std::size_t i = 0; i < c0.size(); ++i) EXPECT_NEAR(c0[i], c1[i], 1e-5f) << m << "x" << n;
    }
}

TEST(Kernels, GemmIsBitIdenticalAcrossThreadCounts)
{
    auto a = random_tensor<float>({37, 91}, 4);
    auto b = random_tensor<float>({91, 301}, 5);
    Tensor<float> c1({37, 301}), c4({37, 301});
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    kernels::gemm<float>(37, 301, 91, a.data(), b.data(), c1.data(), false);
    omp_set_num_threads(4);
    kernels::gemm<float>(37, 301, 91, a.data(), b.data(), c4.data(), false);
    omp_set_num_threads(saved);
    EXPECT_EQ(c1, c4);
}

TEST(Kernels, Im2colMatchesReference)
{
    const auto g = geometry(2, 3, 11, 9, 5, 2, 2);
    auto x = random_tensor<double>({2, 3, 11, 9}, 6);
    Tensor<double> a({g.col_rows(), g.col_cols()}), b({g.col_rows(), g.col_cols()});
    kernels::im2col(g, x.data(), a.data());
    kernels::reference::im2col(g, x.data(), b.data());
    EXPECT_EQ(a, b);
}

TEST(Kernels, Col2imIsAdjointOfIm2col)
{
    const auto g = geometry(2, 2, 10, 10, 9, 4, 4);
    auto x = random_tensor<double>({2, 2, 10, 10}, 7);
    auto y = random_tensor<double>({g.col_rows(), g.col_cols()}, 8);
    Tensor<double> col({g.col_rows(), g.col_cols()});
    kernels::im2col(g, x.data(), col.data());
    Tensor<double> back({2, 2, 10, 10});
    kernels::col2im(g, y.data(), back.data());
    EXPECT_NEAR(mae::testing::inner(col, y), mae::testing::inner(x, back), 1e-9);
}

TEST(Kernels, ConvViaIm2colMatchesDirectLoops)
{
    const auto g = geometry(1, 2, 5, 5, 3, 1, 1);
    auto x = random_tensor<double>({1, 2, 5, 5}, 9);
    auto w = random_tensor<double>({3, 2, 3, 3}, 10);
    Tensor<double> col({g.col_rows(), g.col_cols()});
    kernels::im2col(g, x.data(), col.data());
    Tensor<double> rows({3, g.col_cols()});
    kernels::gemm<double>(3, g.col_cols(), g.col_rows(), w.data(), col.data(), rows.data(), false);
    Tensor<double> direct({1, 3, g.out_h, g.out_w});
    kernels::reference::conv2d_direct(g, 3, x.data(), w.data(), direct.data());
    for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(rows[i], direct[i], 1e-12);
}

TEST(Kernels, TransposeRoundTrip)
{
    auto a = random_tensor<float>({45, 70}, 11);
    Tensor<float> t({70, 45}), back({45, 70});
    kernels::transpose<float>(45, 70, a.data(), t.data());
    kernels::transpose<float>(70, 45, t.data(), back.data());
    EXPECT_EQ(a, back);
    EXPECT_EQ(t[3 * 45 + 2], a[2 * 70 + 3]);
}
