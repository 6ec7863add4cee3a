// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parallel kernels against the serial reference ones they are tested
// against. Shapes follow the training workload: 32-channel stages on a
// batch of 8 crops of 48x48.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mae/kernels.hpp"

namespace k = mae::kernels;

namespace {

std::vector<float> random_vector(std::size_t n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (float& x : v) x = u(rng);
    return v;
}

// First encoder stage: 9x9 stride 4 over 48x48, and a 5x5 stride 2 stage.
k::ConvGeometry geometry(std::size_t stage)
{
    k::ConvGeometry g;
    g.batch = 8;
    if (stage == 0) {
        g.channels = 3, g.height = g.width = 48, g.kernel = 9, g.stride = 4, g.pad = 4;
    } else {
        g.channels = 32, g.height = g.width = 12, g.kernel = 5, g.stride = 2, g.pad = 2;
    }
    g.out_h = (g.height + 2 * g.pad - g.kernel) / g.stride + 1;
    g.out_w = (g.width + 2 * g.pad - g.kernel) / g.stride + 1;
    return g;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state)
{
    const auto m = static_cast<std::size_t>(state.range(0)), n = static_cast<std::size_t>(state.range(1)),
               kk = static_cast<std::size_t>(state.range(2));
    const auto a = random_vector(m * kk, 1), b = random_vector(kk * n, 2);
    std::vector<float> c(m * n);
    for (auto _ : state) {
        if constexpr (Parallel) k::gemm(m, n, kk, a.data(), b.data(), c.data(), false);
        else k::reference::gemm(m, n, kk, a.data(), b.data(), c.data(), false);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * m * n * kk));
}

template <bool Parallel>
void BM_Im2col(benchmark::State& state)
{
    const k::ConvGeometry g = geometry(static_cast<std::size_t>(state.range(0)));
    const auto x = random_vector(g.batch * g.channels * g.height * g.width, 3);
    std::vector<float> col(g.col_rows() * g.col_cols());
    for (auto _ : state) {
        if constexpr (Parallel) k::im2col(g, x.data(), col.data());
        else k::reference::im2col(g, x.data(), col.data());
        benchmark::DoNotOptimize(col.data());
    }
}

// Lowered convolution (im2col + gemm) against the direct loop nest.
template <bool Parallel>
void BM_Conv(benchmark::State& state)
{
    const k::ConvGeometry g = geometry(static_cast<std::size_t>(state.range(0)));
    const std::size_t out = 32;
    const auto x = random_vector(g.batch * g.channels * g.height * g.width, 4);
    const auto w = random_vector(out * g.col_rows(), 5);
    std::vector<float> col(g.col_rows() * g.col_cols()), y(out * g.col_cols());
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::im2col(g, x.data(), col.data());
            k::gemm(out, g.col_cols(), g.col_rows(), w.data(), col.data(), y.data(), false);
        } else {
            k::reference::conv2d_direct(g, out, x.data(), w.data(), y.data());
        }
        benchmark::DoNotOptimize(y.data());
    }
}

} // namespace

BENCHMARK(BM_Gemm<true>)->Args({32, 1152, 243})->Args({32, 288, 800})->Args({128, 128, 128});
BENCHMARK(BM_Gemm<false>)->Args({32, 1152, 243})->Args({32, 288, 800})->Args({128, 128, 128});
BENCHMARK(BM_Im2col<true>)->Arg(0)->Arg(1);
BENCHMARK(BM_Im2col<false>)->Arg(0)->Arg(1);
BENCHMARK(BM_Conv<true>)->Arg(0)->Arg(1);
BENCHMARK(BM_Conv<false>)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
