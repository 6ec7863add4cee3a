// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mae/entropy.hpp"
#include "support/test_util.hpp"

using namespace mae;
using mae::testing::random_tensor;

namespace {

FactorizedDensity<double> make_density(std::size_t channels, std::uint64_t seed,
                                       double init_scale = 10.0)
{
    std::mt19937_64 rng(seed);
    return density_init<double>(channels, rng, init_scale);
}

// Zero biases and couplings leave l(t) linear through the origin: a logistic centered at 0.
FactorizedDensity<double> centered(FactorizedDensity<double> psi)
{
    for (auto* t : {&psi.b1, &psi.b2, &psi.b3, &psi.a1, &psi.a2}) t->fill(0.0);
    return psi;
}

DensitySlots<Var<double>> on_tape(Tape<double>& tape, const FactorizedDensity<double>& psi)
{
    return {tape.constant(psi.H1), tape.constant(psi.H2), tape.constant(psi.H3),
            tape.constant(psi.b1), tape.constant(psi.b2), tape.constant(psi.b3),
            tape.constant(psi.a1), tape.constant(psi.a2)};
}

double total_bits(const Tensor<double>& z, const FactorizedDensity<double>& psi)
{
    Tape<double> tape;
    return rate_bits(tape.constant(z), on_tape(tape, psi)).value()[0];
}

} // namespace

// --- quantize / noise proxy ---------------------------------------------------

TEST(Quantize, RoundingRule)
{
    auto q = quantize(Tensor<double>({6}, {0.4, 0.6, -1.5, 1.5, -0.4, 2.5}));
    EXPECT_EQ(q.storage(), (std::vector<std::int32_t>{0, 1, -2, 2, 0, 3}));
    auto ints = quantize(Tensor<float>({3}, {-7.0f, 0.0f, 12.0f}));
    EXPECT_EQ(ints.storage(), (std::vector<std::int32_t>{-7, 0, 12}));
}

TEST(Quantize, ErrorIsAtMostHalf)
{
    for (int seed = 0; seed < 10; ++seed) {
        auto z = random_tensor<double>({1000}, seed, -50, 50);
        auto q = quantize(z);
        for (std::size_t i = 0; i < z.size(); ++i) EXPECT_LE(std::abs(z[i] - q[i]), 0.5);
    }
}

TEST(NoiseProxy, RangeAndMean)
{
    std::mt19937_64 rng(42);
    Tensor<double> z({1000, 1000}, 3.25);
    Tape<double> tape;
    auto zt = noise_proxy(tape.constant(z), rng).value();
    double mean = 0.0;
    for (std::size_t i = 0; i < zt.size(); ++i) {
        const double u = zt[i] - z[i];
        ASSERT_GE(u, -0.5);
        ASSERT_LT(u, 0.5);
        mean += u;
    }
    EXPECT_NEAR(mean / zt.size(), 0.0, 0.002);
}

TEST(NoiseProxy, GradientIsIdentity)
{
    std::mt19937_64 rng(1);
    Tape<double> tape;
    auto z = tape.leaf(random_tensor<double>({2, 3}, 2));
    auto w = random_tensor<double>({2, 3}, 3);
    tape.backward(ad::sum(ad::mul(noise_proxy(z, rng), tape.constant(w))));
    EXPECT_EQ(tape.grad(z), w);
}

// --- density --------------------------------------------------------------------

TEST(Density, LinearRampGivesUniformBins)
{
    auto ramp = [](double t) { return std::clamp((t + 128.0) / 256.0, 0.0, 1.0); };
    for (double v : {-127.0, -5.0, 0.0, 1.0, 100.0}) EXPECT_DOUBLE_EQ(bin_probability(ramp, v), 1.0 / 256);
    EXPECT_DOUBLE_EQ(bin_probability(ramp, 1000.0), kProbabilityFloor);
}

TEST(Density, CumulativeIsMonotoneWithCorrectLimits)
{
    for (int seed = 0; seed < 5; ++seed) {
        auto psi = make_density(3, seed);
        // Perturb away from the init to cover non-default couplings and weights.
        auto pert = random_tensor<double>({3, 3}, 100 + seed, -2, 2);
        for (std::size_t i = 0; i < psi.a1.size(); ++i) psi.a1[i] += pert[i];
        psi.H2 = random_tensor<double>({3, 3, 3}, 200 + seed, -3, 1);
        for (std::size_t c = 0; c < 3; ++c) {
            double prev = 0.0;
            for (int k = 0; k < 10000; ++k) {
                const double t = -200.0 + 400.0 * k / 9999.0;
                const double v = cumulative(psi, c, t);
                ASSERT_GE(v, prev) << "t=" << t;
                prev = v;
            }
            EXPECT_LT(cumulative(psi, c, -1e5), 1e-9);
            EXPECT_GT(cumulative(psi, c, 1e5), 1 - 1e-9);
        }
    }
}

TEST(Density, BinsSumToOneOverSupport)
{
    auto psi = make_density(4, 7);
    for (std::size_t c = 0; c < 4; ++c) {
        Tensor<double> v({1, 4, 2 * kDefaultSupport + 1, 1});
        for (int s = -kDefaultSupport; s <= kDefaultSupport; ++s)
            for (std::size_t ch = 0; ch < 4; ++ch) v[ch * (2 * kDefaultSupport + 1) + s + kDefaultSupport] = s;
        auto p = density_eval(v, psi);
        double sum = 0.0;
        int floored = 0;
        for (int s = 0; s < 2 * kDefaultSupport + 1; ++s) {
            const double b = p[c * (2 * kDefaultSupport + 1) + s];
            sum += b;
            floored += b == kProbabilityFloor;
        }
        EXPECT_GE(sum, 1 - 1e-3);
        // Unfloored bins telescope to at most 1; each floored bin adds at most the floor.
        EXPECT_LE(sum, 1 + floored * kProbabilityFloor + 1e-12);
    }
}

TEST(Density, FloorHolds)
{
    auto psi = make_density(2, 8);
    auto p = density_eval(Tensor<double>({1, 2, 1, 3}, {-1e6, 0, 1e6, 5e3, 0.5, -1e9}), psi);
    for (double v : p.values()) EXPECT_GE(v, kProbabilityFloor);
}

TEST(Density, EvalAgreesWithTapeLikelihood)
{
    auto psi = make_density(3, 9);
    auto z = random_tensor<double>({2, 3, 4, 4}, 10, -20, 20);
    Tape<double> tape;
    auto lik = likelihood(tape.constant(z), on_tape(tape, psi)).value();
    auto p = density_eval(z, psi);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(lik[i], p[i], 1e-12);
    EXPECT_THROW(density_eval(Tensor<double>({1, 4, 1, 1}), psi), ContractViolation);
}

// --- rate -------------------------------------------------------------------------

TEST(Rate, UniformDensityCostsEightBitsPerElement)
{
    Tape<double> tape;
    auto bits = rate_bits(tape.constant(Tensor<double>({1, 1, 4, 4}, 1.0 / 256)));
    EXPECT_DOUBLE_EQ(bits.value()[0], 128.0);
}

TEST(Rate, Nonnegative)
{
    auto psi = make_density(2, 11, 1.0);
    for (int seed = 0; seed < 5; ++seed)
        EXPECT_GE(total_bits(random_tensor<double>({1, 2, 4, 4}, seed, -3, 3), psi), 0.0);
}

TEST(Rate, ConcentratingInputsNeverIncreasesBits)
{
    for (int seed = 0; seed < 20; ++seed) {
        auto psi = centered(make_density(3, 12 + seed, 4.0));
        auto z = random_tensor<double>({2, 3, 5, 5}, 300 + seed, -15, 15);
        auto half = z;
        for (auto& v : half.values()) v *= 0.5;
        EXPECT_LE(total_bits(half, psi), total_bits(z, psi) + 1e-9);
    }
}

class RateGradients : public ::testing::TestWithParam<int> {};

TEST_P(RateGradients, PassGradCheck)
{
    const int seed = GetParam();
    auto psi = make_density(2, 500 + seed, 2.0);
    std::vector<Tensor<double>> inputs{random_tensor<double>({1, 2, 3, 3}, seed, -3, 3)};
    psi.for_each([&](const char*, Tensor<double>& t) {
        // Nonzero couplings so the tanh paths are exercised.
        if (&t == &psi.a1 || &t == &psi.a2) t = random_tensor<double>(t.shape(), seed + 9, -1, 1);
        inputs.push_back(t);
    });
    const double err = grad_check(
        [](Tape<double>&, std::span<const Var<double>> in) {
            DensitySlots<Var<double>> p{in[1], in[2], in[3], in[4], in[5], in[6], in[7], in[8]};
            return rate_bits(in[0], p);
        },
        inputs);
    EXPECT_LT(err, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RateGradients, ::testing::Range(0, 20));

// --- cdf tables ---------------------------------------------------------------------

TEST(CdfTable, UniformOver256Symbols)
{
    std::vector<double> p(256, 1.0 / 256);
    auto t = build_cdf_table(p, -128);
    ASSERT_EQ(t.symbol_count(), 256u);
    for (std::size_t i = 0; i < 256; ++i) EXPECT_EQ(t.frequency(i), 256u);
    EXPECT_EQ(t.cdf.back(), kCdfTotal);
    EXPECT_EQ(t.min_symbol, -128);
    EXPECT_EQ(t.max_symbol(), 127);
}

TEST(CdfTable, EveryFrequencyAtLeastOne)
{
    std::vector<double> p(511, kProbabilityFloor);
    p[255] = 1.0;
    auto t = build_cdf_table(p, -255);
    for (std::size_t i = 0; i < t.symbol_count(); ++i) EXPECT_GE(t.frequency(i), 1u);
    // Shares: 510 tail bins at ~0.002 (freq 1), the peak at 65023.02. Two spare
    // units go to the peak (residual 0.02) and then to the lowest tail index.
    EXPECT_EQ(t.frequency(255), 65024u + 1);
    EXPECT_EQ(t.frequency(0), 2u);
    EXPECT_EQ(t.frequency(1), 1u);
    for (std::size_t i = 0; i + 1 < t.cdf.size(); ++i) EXPECT_LT(t.cdf[i], t.cdf[i + 1]);
}

TEST(CdfTable, LargestResidualTieGoesToLowerIndex)
{
    // 3 equal shares of 65533 leave one unit for the first symbol.
    auto t = build_cdf_table(std::vector<double>{1, 1, 1}, 0);
    EXPECT_EQ(t.frequency(0), 21846u);
    EXPECT_EQ(t.frequency(1), 21845u);
    EXPECT_EQ(t.frequency(2), 21845u);
}

TEST(CdfTable, BuiltTablesAreDeterministicAndValid)
{
    auto psi = make_density(4, 13);
    auto a = build_cdf_tables(psi, kDefaultSupport);
    auto b = build_cdf_tables(make_density(4, 13), kDefaultSupport);
    EXPECT_EQ(a, b);
    ASSERT_EQ(a.channels.size(), 4u);
    for (const auto& t : a.channels) {
        EXPECT_EQ(t.min_symbol, -kDefaultSupport);
        EXPECT_EQ(t.symbol_count(), 2u * kDefaultSupport + 1);
        EXPECT_EQ(t.cdf.front(), 0u);
        EXPECT_EQ(t.cdf.back(), kCdfTotal);
        for (std::size_t i = 0; i + 1 < t.cdf.size(); ++i) ASSERT_LT(t.cdf[i], t.cdf[i + 1]);
    }
}

TEST(CdfTable, NarrowSupportIsRangeErrorAndAutoWidens)
{
    auto psi = make_density(2, 14);
    EXPECT_LT(support_mass(psi, 0, 1), 1 - 1e-6);
    EXPECT_THROW(build_cdf_tables(psi, 1), RangeError);
    auto set = build_cdf_tables_auto(psi, 1);
    EXPECT_GT(set.support, 1);
    for (std::size_t c = 0; c < 2; ++c) EXPECT_GE(support_mass(psi, c, set.support), 1 - 1e-6);
}
