// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit RGB image files and the [1, 3, H, W] float tensors in [0, 1] that the
// codec works on. Binary PPM (P6, maxval 255) is always available; PNG is
// read and written when the build found libpng.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mae/tensor.hpp"

namespace mae {

/// True when PNG support was compiled in.
bool png_supported();

/// Decodes a P6 PPM or (if supported) PNG file into [1, 3, H, W] in [0, 1].
/// Throws FormatError on malformed or unsupported files.
Tensor<float> read_image(const std::filesystem::path& path);

/// Writes [1, 3, H, W] (clamped to [0, 1], rounded to 8 bits). The format
/// follows the extension: .png when supported, P6 PPM otherwise.
void write_image(const std::filesystem::path& path, const Tensor<float>& image);

/// P6 PPM with all three channels equal to `gray` ([H, W] in [0, 1]).
void write_gray_ppm(const std::filesystem::path& path, const Tensor<float>& gray);

Tensor<float> decode_ppm(const std::string& bytes);
std::string encode_ppm(const Tensor<float>& image);

/// Deterministic procedural test image: smooth color fields, hard-edged
/// shapes, stripes and fine texture, so every quality metric has structure
/// to measure at every scale.
Tensor<float> synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed);

/// Clamps to [0, 1] and rounds to the nearest 8-bit level.
std::uint8_t to_byte(float v);

} // namespace mae
