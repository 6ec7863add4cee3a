// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end image codec on top of a trained checkpoint, plus the
// evaluation passes built on it (rate-distortion curves and feature-ratio
// diagnostics).

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mae/checkpoint.hpp"
#include "mae/range_coder.hpp"

namespace mae {

/// Replicates the last row and column until both sides are multiples of `m`.
Tensor<float> pad_to_multiple(const Tensor<float>& image, std::size_t m);

/// Top-left [height, width] window of [1, C, H, W].
Tensor<float> crop_image(const Tensor<float>& image, std::size_t height, std::size_t width);

class Codec {
public:
    /// Builds the coding tables from the checkpoint's entropy model.
    Codec(Checkpoint checkpoint, std::uint64_t hash);
    static Codec load(const std::filesystem::path& path);

    const Model<float>& model() const { return checkpoint_.model; }
    const Checkpoint& checkpoint() const { return checkpoint_; }
    std::uint64_t hash() const { return hash_; }
    const CdfTableSet& tables() const { return tables_; }

    /// Rounded bottleneck of the padded image, clipped to the table support.
    Tensor<std::int32_t> quantized_latent(const Tensor<float>& image, std::size_t lambda_index) const;

    Bitstream compress(const Tensor<float>& image, std::size_t lambda_index) const;
    /// [1, 3, H, W] at the header's dimensions, clamped to [0, 1]. Throws
    /// FormatError when the stream belongs to another model.
    Tensor<float> decompress(const Bitstream& stream) const;

    /// Training-time rate estimate in bits: the entropy model evaluated on
    /// the unrounded bottleneck plus uniform noise.
    double estimated_bits(const Tensor<float>& image, std::size_t lambda_index, std::mt19937_64& rng) const;

private:
    Checkpoint checkpoint_;
    std::uint64_t hash_ = 0;
    CdfTableSet tables_;
};

/// total bits / pixels.
double bits_per_pixel(const Bitstream& stream);

// --- Rate-distortion curves ---------------------------------------------------

struct RdPoint {
    std::string method;
    double lambda = 0.0;
    double bpp = 0.0;
    double psnr_db = 0.0;
    double msssim_db = 0.0;
};

struct RdMethod {
    std::string name;
    std::vector<const Codec*> codecs;
};

/// One point per (method, tradeoff) over every tradeoff of every codec,
/// averaged over the images. Rows keep the method order and are sorted by
/// bpp within a method.
std::vector<RdPoint> rd_curve(std::span<const RdMethod> methods, std::span<const Tensor<float>> images);

inline constexpr const char* kRdCsvHeader = "method,lambda,bpp,psnr_db,msssim_db";
void write_rd_csv(std::ostream& out, std::span<const RdPoint> rows);

// --- Feature ratios -----------------------------------------------------------

struct ChannelRatio {
    std::size_t channel = 0;
    double min = 0.0;
    double max = 0.0;
    double variance = 0.0;       // population variance over positions
    std::size_t positions = 0;   // positions where the ratio is defined
    Tensor<float> map;           // [h, w], min..max mapped to 0..1
};

/// Element-wise z(a) / z(b) of the bottleneck (after any bottleneck
/// scaling) for each requested channel. Positions with |z(b)| < 1e-12 are
/// left out of the statistics and drawn at the mean.
std::vector<ChannelRatio> feature_ratio(const Model<float>& model, const Tensor<float>& image,
                                        std::size_t lambda_a, std::size_t lambda_b,
                                        std::span<const std::size_t> channels);

} // namespace mae
