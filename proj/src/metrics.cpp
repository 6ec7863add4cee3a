// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

#include "mae/errors.hpp"

namespace mae {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

struct Plane {
    std::size_t h = 0, w = 0;
    std::vector<double> v;

    double operator()(std::size_t y, std::size_t x) const { return v[y * w + x]; }
};

void check_pair(const Tensor<float>& x, const Tensor<float>& y)
{
    if (x.shape() != y.shape()) {
        throw ContractViolation("metric inputs differ in shape: " + shape_str(x.shape()) + " vs " +
                                shape_str(y.shape()));
    }
    if (x.rank() != 4 || x.dim(0) != 1 || x.dim(1) != 3 || x.empty()) {
        throw ContractViolation("metrics expect [1, 3, H, W] images, got " + shape_str(x.shape()));
    }
}

Plane luma(const Tensor<float>& img)
{
    Plane p{img.dim(2), img.dim(3), {}};
    const std::size_t n = p.h * p.w;
    p.v.resize(n);
    const float* r = img.data();
    for (std::size_t i = 0; i < n; ++i) p.v[i] = 0.299 * r[i] + 0.587 * r[n + i] + 0.114 * r[2 * n + i];
    return p;
}

Plane downsample(const Plane& p)
{
    Plane d{p.h / 2, p.w / 2, {}};
    d.v.resize(d.h * d.w);
    for (std::size_t y = 0; y < d.h; ++y)
        for (std::size_t x = 0; x < d.w; ++x)
            d.v[y * d.w + x] =
                0.25 * (p(2 * y, 2 * x) + p(2 * y, 2 * x + 1) + p(2 * y + 1, 2 * x) + p(2 * y + 1, 2 * x + 1));
    return d;
}

std::array<double, kSsimWindow> gaussian_window()
{
    std::array<double, kSsimWindow> g{};
    double sum = 0.0;
    const double c = (kSsimWindow - 1) / 2.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        g[i] = std::exp(-(i - c) * (i - c) / (2 * kSsimSigma * kSsimSigma));
        sum += g[i];
    }
    for (auto& v : g) v /= sum;
    return g;
}

// Separable Gaussian filter, valid region only.
Plane blur(const Plane& p, const std::array<double, kSsimWindow>& g)
{
    const std::size_t oh = p.h - kSsimWindow + 1, ow = p.w - kSsimWindow + 1;
    std::vector<double> tmp(p.h * ow);
    for (std::size_t y = 0; y < p.h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t k = 0; k < kSsimWindow; ++k) s += g[k] * p(y, x + k);
            tmp[y * ow + x] = s;
        }
    Plane out{oh, ow, std::vector<double>(oh * ow)};
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t k = 0; k < kSsimWindow; ++k) s += g[k] * tmp[(y + k) * ow + x];
            out.v[y * ow + x] = s;
        }
    return out;
}

Plane product(const Plane& a, const Plane& b)
{
    Plane out{a.h, a.w, std::vector<double>(a.v.size())};
    for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
    return out;
}

struct SsimTerms {
    double luminance;
    double contrast_structure;
};

// Symmetric in (a, b): every term is built from symmetric combinations.
SsimTerms ssim_terms(const Plane& a, const Plane& b)
{
    static const auto g = gaussian_window();
    const Plane ma = blur(a, g), mb = blur(b, g);
    const Plane saa = blur(product(a, a), g), sbb = blur(product(b, b), g), sab = blur(product(a, b), g);
    double l_sum = 0.0, cs_sum = 0.0;
    for (std::size_t i = 0; i < ma.v.size(); ++i) {
        const double mu_a = ma.v[i], mu_b = mb.v[i];
        const double var_a = saa.v[i] - mu_a * mu_a;
        const double var_b = sbb.v[i] - mu_b * mu_b;
        const double cov = sab.v[i] - mu_a * mu_b;
        l_sum += (2 * mu_a * mu_b + kC1) / (mu_a * mu_a + mu_b * mu_b + kC1);
        cs_sum += (2 * cov + kC2) / (var_a + var_b + kC2);
    }
    const double n = static_cast<double>(ma.v.size());
    return {l_sum / n, cs_sum / n};
}

} // namespace

double mse(const Tensor<float>& x, const Tensor<float>& y)
{
    check_pair(x, y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x[i]) - y[i];
        s += d * d;
    }
    return s / static_cast<double>(x.size());
}

double psnr(const Tensor<float>& x, const Tensor<float>& y)
{
    const double m = mse(x, y);
    if (m <= 0.0) return kDecibelCap;
    return std::min(kDecibelCap, 10.0 * std::log10(1.0 / m));
}

std::size_t ms_ssim_scales_for(std::size_t height, std::size_t width)
{
    std::size_t side = std::min(height, width);
    std::size_t scales = 0;
    while (scales < kMsSsimScales && side >= kSsimWindow) {
        ++scales;
        side /= 2;
    }
    return scales;
}

MsSsim ms_ssim_detail(const Tensor<float>& x, const Tensor<float>& y)
{
    check_pair(x, y);
    const std::size_t scales = ms_ssim_scales_for(x.dim(2), x.dim(3));
    if (scales == 0) {
        throw ContractViolation("ms-ssim needs both sides >= " + std::to_string(kSsimWindow) + ", got " +
                                shape_str(x.shape()));
    }
    double weight_sum = 0.0;
    for (std::size_t s = 0; s < scales; ++s) weight_sum += kMsSsimWeights[s];

    Plane a = luma(x), b = luma(y);
    double value = 1.0;
    for (std::size_t s = 0; s < scales; ++s) {
        const SsimTerms t = ssim_terms(a, b);
        const double w = kMsSsimWeights[s] / weight_sum;
        // Negative contrast-structure (anti-correlated detail) would make the power undefined.
        value *= std::pow(std::max(t.contrast_structure, 0.0), w);
        if (s + 1 == scales) {
            value *= std::pow(std::max(t.luminance, 0.0), w);
        } else {
            a = downsample(a);
            b = downsample(b);
        }
    }
    return {std::clamp(value, 0.0, 1.0), scales};
}

double ms_ssim(const Tensor<float>& x, const Tensor<float>& y)
{
    const MsSsim r = ms_ssim_detail(x, y);
    if (r.scales < kMsSsimScales) {
        std::cerr << "warning: ms-ssim on " << x.dim(2) << "x" << x.dim(3) << " uses " << r.scales
                  << " of " << kMsSsimScales << " scales\n";
    }
    return r.value;
}

double ms_ssim_db(double v)
{
    if (v >= 1.0) return kDecibelCap;
    return std::min(kDecibelCap, -10.0 * std::log10(1.0 - v));
}

} // namespace mae
