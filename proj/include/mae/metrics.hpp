// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Full-reference quality metrics on [1, 3, H, W] images in [0, 1].

#pragma once

#include <array>
#include <cstddef>

#include "mae/tensor.hpp"

namespace mae {

inline constexpr double kDecibelCap = 99.0;
inline constexpr std::size_t kMsSsimScales = 5;
inline constexpr std::array<double, kMsSsimScales> kMsSsimWeights = {0.0448, 0.2856, 0.3001,
                                                                      0.2363, 0.1333};
inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

double mse(const Tensor<float>& x, const Tensor<float>& y);

/// 10 log10(1 / MSE), capped at kDecibelCap.
double psnr(const Tensor<float>& x, const Tensor<float>& y);

struct MsSsim {
    double value = 1.0;
    /// Scales actually evaluated; fewer than kMsSsimScales when the image is
    /// too small for the full pyramid (weights are renormalized).
    std::size_t scales = kMsSsimScales;
};

/// Multi-scale SSIM of the Rec.601 luma planes. Symmetric in its arguments.
MsSsim ms_ssim_detail(const Tensor<float>& x, const Tensor<float>& y);

/// ms_ssim_detail().value; logs a warning to stderr when scales were dropped.
double ms_ssim(const Tensor<float>& x, const Tensor<float>& y);

/// -10 log10(1 - v), capped at kDecibelCap.
double ms_ssim_db(double v);

/// Largest pyramid depth (<= kMsSsimScales) whose coarsest level still fits the window.
std::size_t ms_ssim_scales_for(std::size_t height, std::size_t width);

} // namespace mae
