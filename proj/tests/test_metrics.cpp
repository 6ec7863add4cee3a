// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mae/errors.hpp"
#include "mae/image.hpp"
#include "mae/metrics.hpp"
#include "support/test_util.hpp"

using namespace mae;

namespace {

Tensor<float> constant_image(std::size_t h, std::size_t w, float v)
{
    return Tensor<float>({1, 3, h, w}, v);
}

Tensor<float> with_noise(const Tensor<float>& x, double amplitude, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    Tensor<float> y = x;
    for (auto& v : y.values()) v = static_cast<float>(std::clamp(v + u(rng), 0.0, 1.0));
    return y;
}

// Straightforward MS-SSIM: full 2-D window sums, explicit pyramid, no reuse
// of intermediate planes.
double ms_ssim_oracle(const Tensor<float>& x, const Tensor<float>& y, std::size_t scales)
{
    using Img = std::vector<std::vector<double>>;
    auto lum = [](const Tensor<float>& t) {
        Img p(t.dim(2), std::vector<double>(t.dim(3)));
        for (std::size_t r = 0; r < t.dim(2); ++r)
            for (std::size_t c = 0; c < t.dim(3); ++c)
                p[r][c] = 0.299 * t.at(0, 0, r, c) + 0.587 * t.at(0, 1, r, c) + 0.114 * t.at(0, 2, r, c);
        return p;
    };
    double win[11][11];
    double total = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) total += win[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
    for (auto& row : win)
        for (double& v : row) v /= total;
    const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    double wsum = 0.0;
    for (std::size_t s = 0; s < scales; ++s) wsum += weights[s];

    Img a = lum(x), b = lum(y);
    double result = 1.0;
    for (std::size_t s = 0; s < scales; ++s) {
        const std::size_t h = a.size() - 10, w = a[0].size() - 10;
        double l_acc = 0.0, cs_acc = 0.0;
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < 11; ++i)
                    for (int j = 0; j < 11; ++j) {
                        const double va = a[r + i][c + j], vb = b[r + i][c + j], g = win[i][j];
                        ma += g * va;
                        mb += g * vb;
                        saa += g * va * va;
                        sbb += g * vb * vb;
                        sab += g * va * vb;
                    }
                const double c1 = 1e-4, c2 = 9e-4;
                l_acc += (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
                cs_acc += (2 * (sab - ma * mb) + c2) / ((saa - ma * ma) + (sbb - mb * mb) + c2);
            }
        const double n = static_cast<double>(h * w);
        result *= std::pow(std::max(cs_acc / n, 0.0), weights[s] / wsum);
        if (s + 1 == scales) {
            result *= std::pow(std::max(l_acc / n, 0.0), weights[s] / wsum);
            break;
        }
        Img da(a.size() / 2, std::vector<double>(a[0].size() / 2)), db = da;
        for (std::size_t r = 0; r < da.size(); ++r)
            for (std::size_t c = 0; c < da[0].size(); ++c) {
                da[r][c] = (a[2 * r][2 * c] + a[2 * r + 1][2 * c] + a[2 * r][2 * c + 1] + a[2 * r + 1][2 * c + 1]) / 4;
                db[r][c] = (b[2 * r][2 * c] + b[2 * r + 1][2 * c] + b[2 * r][2 * c + 1] + b[2 * r + 1][2 * c + 1]) / 4;
            }
        a = std::move(da);
        b = std::move(db);
    }
    return result;
}

} // namespace

TEST(Psnr, IdenticalImagesHitTheCap)
{
    const auto x = synthetic_image(32, 32, 1);
    EXPECT_EQ(psnr(x, x), 99.0);
}

TEST(Psnr, HalfGrayAgainstBlack)
{
    EXPECT_NEAR(psnr(constant_image(8, 8, 0.0f), constant_image(8, 8, 0.5f)), 6.0206, 1e-4);
    EXPECT_NEAR(mse(constant_image(8, 8, 0.0f), constant_image(8, 8, 0.5f)), 0.25, 1e-12);
}

TEST(Psnr, ShapeMismatchIsAContractViolation)
{
    EXPECT_THROW(psnr(constant_image(8, 8, 0), constant_image(8, 9, 0)), ContractViolation);
    EXPECT_THROW(ms_ssim(constant_image(8, 8, 0), constant_image(9, 8, 0)), ContractViolation);
}

TEST(Metrics, StrictlyDecreaseWithNoiseAmplitude)
{
    const auto x = synthetic_image(192, 192, 3);
    double last_psnr = psnr(x, x), last_ssim = ms_ssim(x, x);
    EXPECT_EQ(last_ssim, 1.0);
    for (double amp : {0.01, 0.03, 0.06, 0.12, 0.25}) {
        const auto y = with_noise(x, amp, 11);
        const double p = psnr(x, y), m = ms_ssim(x, y);
        EXPECT_LT(p, last_psnr) << amp;
        EXPECT_LT(m, last_ssim) << amp;
        last_psnr = p;
        last_ssim = m;
    }
}

TEST(MsSsim, IdenticalImagesGiveOneAndTheCap)
{
    const auto x = synthetic_image(176, 200, 4);
    const MsSsim r = ms_ssim_detail(x, x);
    EXPECT_DOUBLE_EQ(r.value, 1.0);
    EXPECT_EQ(r.scales, 5u);
    EXPECT_EQ(ms_ssim_db(r.value), 99.0);
}

TEST(MsSsim, Symmetric)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto a = synthetic_image(192, 192, seed);
        const auto b = with_noise(synthetic_image(192, 192, seed + 100), 0.05, seed);
        EXPECT_NEAR(ms_ssim(a, b), ms_ssim(b, a), 1e-9);
    }
}

TEST(MsSsim, BelowOneForAnyDifferingPair)
{
    const auto x = synthetic_image(192, 192, 8);
    for (std::size_t i : {std::size_t{0}, std::size_t{5000}, x.size() - 1}) {
        Tensor<float> y = x;
        y[i] = y[i] > 0.5f ? y[i] - 1.0f / 255 : y[i] + 1.0f / 255;
        EXPECT_LT(ms_ssim(x, y), 1.0) << i;
    }
}

TEST(MsSsim, MatchesDirectWindowOracle)
{
    const auto x = synthetic_image(176, 180, 21);
    const auto y = with_noise(x, 0.08, 2);
    EXPECT_NEAR(ms_ssim(x, y), ms_ssim_oracle(x, y, 5), 1e-9);
    const auto small_x = synthetic_image(64, 70, 5), small_y = with_noise(small_x, 0.1, 3);
    const MsSsim r = ms_ssim_detail(small_x, small_y);
    EXPECT_EQ(r.scales, 3u);
    EXPECT_NEAR(r.value, ms_ssim_oracle(small_x, small_y, 3), 1e-9);
}

TEST(MsSsim, ScaleCountFollowsTheShortSide)
{
    EXPECT_EQ(ms_ssim_scales_for(176, 500), 5u);
    EXPECT_EQ(ms_ssim_scales_for(175, 500), 4u);
    EXPECT_EQ(ms_ssim_scales_for(11, 11), 1u);
    EXPECT_EQ(ms_ssim_scales_for(10, 400), 0u);
    EXPECT_THROW(ms_ssim(constant_image(10, 10, 0), constant_image(10, 10, 0)), ContractViolation);
}

TEST(MsSsim, DecibelMapping)
{
    EXPECT_NEAR(ms_ssim_db(0.9), 10.0, 1e-12);
    EXPECT_NEAR(ms_ssim_db(0.99), 20.0, 1e-9);
    EXPECT_EQ(ms_ssim_db(1.0 - 1e-12), 99.0);
}

TEST(Image, PpmRoundTripIsBitExactOnEightBitValues)
{
    Tensor<float> x({1, 3, 5, 7});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>((i * 37) % 256) / 255.0f;
    const Tensor<float> y = decode_ppm(encode_ppm(x));
    EXPECT_EQ(y, x);
}

TEST(Image, ToByteClampsAndRounds)
{
    EXPECT_EQ(to_byte(-0.3f), 0);
    EXPECT_EQ(to_byte(1.7f), 255);
    EXPECT_EQ(to_byte(0.5f), 128);
    EXPECT_EQ(to_byte(0.499f / 255.0f), 0);
}

TEST(Image, MalformedPpmIsAFormatError)
{
    EXPECT_THROW(decode_ppm("P5\n2 2\n255\n...."), FormatError);
    EXPECT_THROW(decode_ppm("P6\n2 2\n255\nshort"), FormatError);
    EXPECT_THROW(decode_ppm("P6\n2 2\n65535\n"), FormatError);
    EXPECT_THROW(decode_ppm(""), FormatError);
}

TEST(Image, PpmHeaderCommentsAreSkipped)
{
    const std::string bytes = std::string("P6\n# made by hand\n1 1\n255\n") + std::string("\xff\x00\x80", 3);
    const Tensor<float> x = decode_ppm(bytes);
    ASSERT_EQ(x.shape(), (Shape{1, 3, 1, 1}));
    EXPECT_EQ(x[0], 1.0f);
    EXPECT_EQ(x[1], 0.0f);
    EXPECT_EQ(x[2], 128.0f / 255.0f);
}

TEST(Image, FileRoundTripThroughEveryFormat)
{
    const auto dir = std::filesystem::temp_directory_path() / "mae_image_test";
    std::filesystem::create_directories(dir);
    const Tensor<float> x = decode_ppm(encode_ppm(synthetic_image(33, 17, 6)));
    write_image(dir / "a.ppm", x);
    EXPECT_EQ(read_image(dir / "a.ppm"), x);
    if (png_supported()) {
        write_image(dir / "a.png", x);
        EXPECT_EQ(read_image(dir / "a.png"), x);
    }
    std::filesystem::remove_all(dir);
}

TEST(Image, SyntheticImagesAreDeterministicAndInRange)
{
    const auto a = synthetic_image(64, 48, 9);
    EXPECT_EQ(a, synthetic_image(64, 48, 9));
    EXPECT_NE(a, synthetic_image(64, 48, 10));
    EXPECT_EQ(a.shape(), (Shape{1, 3, 48, 64}));
    for (float v : a.values()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
}
