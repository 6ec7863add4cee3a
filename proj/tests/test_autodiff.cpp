// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "mae/autodiff.hpp"
#include "mae/kernels.hpp"
#include "support/test_util.hpp"

using namespace mae;
using mae::testing::inner;
using mae::testing::random_tensor;

namespace {

constexpr double kGradTol = 1e-4;
constexpr int kSeeds = 20;

Var<double> weighted_sum(const Var<double>& y, std::uint64_t seed)
{
    // Random projection so every output coordinate carries a distinct weight.
    return ad::sum(ad::mul(y, y.tape().constant(random_tensor<double>(y.shape(), seed))));
}

} // namespace

// --- conv2d -----------------------------------------------------------------

TEST(Conv2d, UnitKernelIsIdentity)
{
    Tape<float> tape;
    auto x = random_tensor<float>({1, 1, 4, 4}, 1);
    auto y = ad::conv2d(tape.constant(x), tape.constant(Tensor<float>({1, 1, 1, 1}, 1.0f)), 1, 0);
    EXPECT_EQ(y.value(), x);
}

TEST(Conv2d, OutputShapeFormula)
{
    Tape<float> tape;
    auto y = ad::conv2d(tape.constant(Tensor<float>({1, 3, 64, 64})),
                        tape.constant(Tensor<float>({192, 3, 9, 9})), 4, 4);
    EXPECT_EQ(y.shape(), (Shape{1, 192, 16, 16}));
}

TEST(Conv2d, MatchesNestedLoopOracle)
{
    auto x = random_tensor<double>({1, 2, 5, 5}, 2);
    auto k = random_tensor<double>({2, 2, 5, 5}, 3);
    Tape<double> tape;
    auto y = ad::conv2d(tape.constant(x), tape.constant(k), 1, 2);
    kernels::ConvGeometry g{1, 2, 5, 5, 5, 1, 2, 5, 5};
    Tensor<double> ref({1, 2, 5, 5});
    kernels::reference::conv2d_direct(g, 2, x.data(), k.data(), ref.data());
    for (std::size_t i = 0; i < ref.size(); ++i)
        EXPECT_NEAR(y.value()[i], ref[i], 1e-6 * std::max(1.0, std::abs(ref[i])));
}

TEST(Conv2d, ChannelMismatchNamesDimensions)
{
    Tape<float> tape;
    try {
        ad::conv2d(tape.constant(Tensor<float>({1, 3, 8, 8})),
                   tape.constant(Tensor<float>({4, 2, 3, 3})), 1, 1);
        FAIL() << "expected ContractViolation";
    } catch (const ContractViolation& e) {
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    }
    EXPECT_THROW(ad::conv2d(tape.constant(Tensor<float>({1, 1, 2, 2})),
                            tape.constant(Tensor<float>({1, 1, 5, 5})), 1, 0),
                 ContractViolation);
}

TEST(Conv2d, AdjointOfInputGradient)
{
    // <conv(x), y> == <x, conv^T(y)> with the shared kernel.
    for (int seed = 0; seed < kSeeds; ++seed) {
        auto x = random_tensor<double>({2, 3, 16, 16}, 100 + seed);
        auto k = random_tensor<double>({4, 3, 5, 5}, 200 + seed);
        Tape<double> tape;
        auto cx = ad::conv2d(tape.constant(x), tape.constant(k), 2, 2);
        auto y = random_tensor<double>(cx.shape(), 300 + seed);
        auto ty = ad::conv2d_transpose(tape.constant(y), tape.constant(k), 2, 2, 1);
        ASSERT_EQ(ty.shape(), x.shape());
        const double lhs = inner(cx.value(), y);
        const double rhs = inner(x, ty.value());
        EXPECT_NEAR(lhs, rhs, 1e-6 * std::max(1.0, std::abs(lhs)));
    }
}

// --- conv2d_transpose ---------------------------------------------------------

TEST(Conv2dTranspose, UnitKernelIsIdentity)
{
    Tape<float> tape;
    auto x = random_tensor<float>({1, 1, 4, 4}, 4);
    auto y = ad::conv2d_transpose(tape.constant(x), tape.constant(Tensor<float>({1, 1, 1, 1}, 1.0f)),
                                  1, 0, 0);
    EXPECT_EQ(y.value(), x);
}

TEST(Conv2dTranspose, DeclaredOutputShape)
{
    Tape<float> tape;
    auto y = ad::conv2d_transpose(tape.constant(Tensor<float>({1, 192, 16, 16})),
                                  tape.constant(Tensor<float>({192, 192, 5, 5})), 2, 2, 1);
    EXPECT_EQ(y.shape(), (Shape{1, 192, 32, 32}));
}

TEST(Conv2dTranspose, RejectsBadShapes)
{
    Tape<float> tape;
    EXPECT_THROW(ad::conv2d_transpose(tape.constant(Tensor<float>({1, 3, 4, 4})),
                                      tape.constant(Tensor<float>({2, 3, 5, 5})), 2, 2, 1),
                 ContractViolation);
    EXPECT_THROW(ad::conv2d_transpose(tape.constant(Tensor<float>({1, 2, 4, 4})),
                                      tape.constant(Tensor<float>({2, 3, 5, 5})), 2, 2, 2),
                 ContractViolation);
}

// --- affine -------------------------------------------------------------------

TEST(Affine, IdentityAndScalar)
{
    Tape<double> tape;
    auto x = random_tensor<double>({2, 3}, 5);
    Tensor<double> eye({3, 3});
    for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1;
    auto y = ad::affine(tape.constant(x), tape.constant(eye), tape.constant(Tensor<double>({3})));
    EXPECT_EQ(y.value(), x);

    auto s = ad::affine(tape.constant(Tensor<double>({1, 1}, {1.0})),
                        tape.constant(Tensor<double>({1, 1}, {2.0})),
                        tape.constant(Tensor<double>({1}, {3.0})));
    EXPECT_DOUBLE_EQ(s.value()[0], 5.0);
}

TEST(Affine, MatchesTripleLoop)
{
    auto x = random_tensor<double>({2, 3}, 6);
    auto w = random_tensor<double>({3, 4}, 7);
    auto b = random_tensor<double>({4}, 8);
    Tape<double> tape;
    auto y = ad::affine(tape.constant(x), tape.constant(w), tape.constant(b));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double ref = b[j];
            for (std::size_t k = 0; k < 3; ++k) ref += x[i * 3 + k] * w[k * 4 + j];
            EXPECT_NEAR(y.value()[i * 4 + j], ref, 1e-7);
        }
    EXPECT_THROW(ad::affine(tape.constant(x), tape.constant(Tensor<double>({4, 4})),
                            tape.constant(b)),
                 ContractViolation);
}

// --- pointwise / reduce -------------------------------------------------------

TEST(Pointwise, ScalarValues)
{
    Tape<double> tape;
    auto v = [&](double x) { return tape.constant(Tensor<double>({1}, {x})); };
    EXPECT_EQ(ad::relu(v(-1)).value()[0], 0.0);
    EXPECT_EQ(ad::relu(v(2)).value()[0], 2.0);
    EXPECT_EQ(ad::exp(v(0)).value()[0], 1.0);
    EXPECT_EQ(ad::log2(v(8)).value()[0], 3.0);
    EXPECT_EQ(ad::sqrt(v(9)).value()[0], 3.0);
    EXPECT_EQ(ad::div(v(1), v(4)).value()[0], 0.25);
}

TEST(Pointwise, DomainErrorsNameTheElement)
{
    Tape<double> tape;
    auto x = tape.constant(Tensor<double>({3}, {1.0, 2.0, -1.0}));
    try {
        ad::log2(x);
        FAIL();
    } catch (const NumericDomainError& e) {
        EXPECT_NE(std::string(e.what()).find("element 2"), std::string::npos);
    }
    EXPECT_THROW(ad::sqrt(tape.constant(Tensor<double>({1}, {0.0}))), NumericDomainError);
    EXPECT_THROW(ad::div(x, tape.constant(Tensor<double>({3}, {1.0, 0.0, 1.0}))), NumericDomainError);
    EXPECT_THROW(ad::add(x, tape.constant(Tensor<double>({2}))), ContractViolation);
}

TEST(Reduce, SumAndMean)
{
    Tape<double> tape;
    EXPECT_DOUBLE_EQ(ad::mean(tape.constant(Tensor<double>({3}, {1, 2, 3}))).value()[0], 2.0);
    EXPECT_DOUBLE_EQ(ad::sum(tape.constant(Tensor<double>({4, 5}))).value()[0], 0.0);
}

TEST(Reduce, MatchesSequentialAccumulation)
{
    auto x = random_tensor<double>({3, 4, 5, 6}, 9);
    double ref = 0.0;
    for (double v : x.values()) ref += v;
    Tape<double> tape;
    EXPECT_NEAR(ad::sum(tape.constant(x)).value()[0], ref, 1e-6 * std::abs(ref));

    auto partial = ad::reduce(ad::Reduction::sum, tape.constant(x), {0, 2});
    ASSERT_EQ(partial.shape(), (Shape{4, 6}));
    double p = 0.0;
    for (std::size_t n = 0; n < 3; ++n)
        for (std::size_t h = 0; h < 5; ++h) p += x[((n * 4 + 1) * 5 + h) * 6 + 2];
    EXPECT_NEAR(partial.value()[1 * 6 + 2], p, 1e-12);
    EXPECT_THROW(ad::reduce(ad::Reduction::sum, tape.constant(x), {4}), ContractViolation);
}

// --- backward -----------------------------------------------------------------

TEST(Backward, SumGivesOnes)
{
    Tape<double> tape;
    auto x = tape.leaf(random_tensor<double>({2, 3}, 10));
    tape.backward(ad::sum(x));
    const auto g = tape.grad(x);
    for (double v : g.values()) EXPECT_EQ(v, 1.0);
}

TEST(Backward, SquareAtThree)
{
    Tape<double> tape;
    auto x = tape.leaf(Tensor<double>({1}, {3.0}));
    tape.backward(ad::sum(ad::mul(x, x)));
    EXPECT_DOUBLE_EQ(tape.grad(x)[0], 6.0);
}

TEST(Backward, UnusedLeafGetsExactZero)
{
    Tape<double> tape;
    auto x = tape.leaf(random_tensor<double>({4}, 11));
    auto unused = tape.leaf(random_tensor<double>({5}, 12));
    tape.backward(ad::sum(ad::square(x)));
    const auto g = tape.grad(unused);
    for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, RejectsNonScalarAndReuse)
{
    Tape<double> tape;
    auto x = tape.leaf(random_tensor<double>({4}, 13));
    EXPECT_THROW(tape.backward(ad::square(x)), ContractViolation);
    auto loss = ad::sum(x);
    tape.backward(loss);
    EXPECT_THROW(tape.backward(loss), ContractViolation);
}

// --- grad_check ---------------------------------------------------------------

TEST(GradCheck, SumOfSquares)
{
    const double err = grad_check(
        [](Tape<double>&, std::span<const Var<double>> in) { return ad::sum(ad::square(in[0])); },
        {random_tensor<double>({3, 4}, 14)}, 1e-4);
    EXPECT_LT(err, 1e-6);
}

TEST(GradCheck, ConstantProgramHasZeroError)
{
    const double err = grad_check(
        [](Tape<double>& tape, std::span<const Var<double>>) { return ad::scalar(tape, 3.0); },
        {random_tensor<double>({5}, 15)}, 1e-4);
    EXPECT_EQ(err, 0.0);
}

class PrimitiveGradients : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveGradients, Conv2d)
{
    const int seed = GetParam();
    const double err = grad_check(
        [seed](Tape<double>&, std::span<const Var<double>> in) {
            return weighted_sum(ad::conv2d(in[0], in[1], 2, 1), seed);
        },
        {random_tensor<double>({2, 2, 6, 6}, seed), random_tensor<double>({3, 2, 3, 3}, seed + 1)});
    EXPECT_LT(err, kGradTol);
}

TEST_P(PrimitiveGradients, Conv2dTranspose)
{
    const int seed = GetParam();
    const double err = grad_check(
        [seed](Tape<double>&, std::span<const Var<double>> in) {
            return weighted_sum(ad::conv2d_transpose(in[0], in[1], 2, 2, 1), seed);
        },
        {random_tensor<double>({2, 3, 3, 3}, seed), random_tensor<double>({3, 2, 5, 5}, seed + 1)});
    EXPECT_LT(err, kGradTol);
}

TEST_P(PrimitiveGradients, Affine)
{
    const int seed = GetParam();
    const double err = grad_check(
        [seed](Tape<double>&, std::span<const Var<double>> in) {
            return weighted_sum(ad::affine(in[0], in[1], in[2]), seed);
        },
        {random_tensor<double>({2, 3}, seed), random_tensor<double>({3, 4}, seed + 1),
         random_tensor<double>({4}, seed + 2)});
    EXPECT_LT(err, kGradTol);
}

TEST_P(PrimitiveGradients, Unary)
{
    const int seed = GetParam();
    for (auto kind : {ad::Unary::relu, ad::Unary::exp, ad::Unary::log2, ad::Unary::square,
                      ad::Unary::sqrt, ad::Unary::neg}) {
        const bool positive = kind == ad::Unary::log2 || kind == ad::Unary::sqrt;
        // relu is probed away from its kink.
        auto x = random_tensor<double>({7}, seed, positive ? 0.5 : 0.1, 2.0);
        if (!positive)
            for (std::size_t i = 0; i < x.size(); i += 2) x[i] = -x[i];
        const double err = grad_check(
            [seed, kind](Tape<double>&, std::span<const Var<double>> in) {
                return weighted_sum(ad::pointwise(kind, in[0]), seed);
            },
            {x});
        EXPECT_LT(err, kGradTol) << static_cast<int>(kind);
    }
}

TEST_P(PrimitiveGradients, BinaryWithBroadcast)
{
    const int seed = GetParam();
    for (auto kind : {ad::Binary::add, ad::Binary::sub, ad::Binary::mul, ad::Binary::div}) {
        auto b = random_tensor<double>({6}, seed + 1, 0.5, 2.0);
        const double err = grad_check(
            [seed, kind](Tape<double>&, std::span<const Var<double>> in) {
                auto full = ad::pointwise(kind, in[0], in[1]);
                auto bcast = ad::pointwise(kind, in[0], in[2]);
                return ad::add(weighted_sum(full, seed), weighted_sum(bcast, seed + 7));
            },
            {random_tensor<double>({6}, seed), b, random_tensor<double>({1}, seed + 2, 0.5, 2.0)});
        EXPECT_LT(err, kGradTol) << static_cast<int>(kind);
    }
}

TEST_P(PrimitiveGradients, ReduceAndChannelOps)
{
    const int seed = GetParam();
    const double err = grad_check(
        [seed](Tape<double>&, std::span<const Var<double>> in) {
            auto h = ad::channel_bias(ad::channel_scale(in[0], in[1]), in[2]);
            auto r = ad::reduce(ad::Reduction::mean, h, {0, 3});
            return weighted_sum(r, seed);
        },
        {random_tensor<double>({2, 3, 4, 5}, seed), random_tensor<double>({3}, seed + 1),
         random_tensor<double>({3}, seed + 2)});
    EXPECT_LT(err, kGradTol);
}

INSTANTIATE_TEST_SUITE_P(Seeds, PrimitiveGradients, ::testing::Range(0, kSeeds));
