// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/codec.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "mae/errors.hpp"
#include "mae/metrics.hpp"

namespace mae {

Tensor<float> pad_to_multiple(const Tensor<float>& image, std::size_t m)
{
    if (image.rank() != 4 || image.dim(2) == 0 || image.dim(3) == 0) {
        throw ContractViolation("expected a non-empty [N, C, H, W] image, got " + shape_str(image.shape()));
    }
    const std::size_t n = image.dim(0), c = image.dim(1), h = image.dim(2), w = image.dim(3);
    const std::size_t ph = (h + m - 1) / m * m, pw = (w + m - 1) / m * m;
    if (ph == h && pw == w) return image;
    Tensor<float> out({n, c, ph, pw});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t y = 0; y < ph; ++y)
                for (std::size_t x = 0; x < pw; ++x)
                    out.at(b, ch, y, x) = image.at(b, ch, std::min(y, h - 1), std::min(x, w - 1));
    return out;
}

Tensor<float> crop_image(const Tensor<float>& image, std::size_t height, std::size_t width)
{
    if (image.rank() != 4 || image.dim(2) < height || image.dim(3) < width) {
        throw ContractViolation("cannot crop " + shape_str(image.shape()) + " to " + std::to_string(height) + "x" +
                                std::to_string(width));
    }
    const std::size_t n = image.dim(0), c = image.dim(1);
    Tensor<float> out({n, c, height, width});
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t y = 0; y < height; ++y)
                for (std::size_t x = 0; x < width; ++x) out.at(b, ch, y, x) = image.at(b, ch, y, x);
    return out;
}

Codec::Codec(Checkpoint checkpoint, std::uint64_t hash)
    : checkpoint_(std::move(checkpoint)), hash_(hash),
      tables_(build_cdf_tables_auto(checkpoint_.model.params.entropy))
{
}

Codec Codec::load(const std::filesystem::path& path)
{
    LoadedCheckpoint l = load_checkpoint(path);
    return Codec(std::move(l.checkpoint), l.hash);
}

Tensor<std::int32_t> Codec::quantized_latent(const Tensor<float>& image, std::size_t lambda_index) const
{
    const Tensor<float> padded = pad_to_multiple(image, model().spec.arch.downsampling());
    Tensor<std::int32_t> q = quantize(analyze(model(), padded, lambda_index));
    const std::int32_t l = tables_.support;
    for (auto& v : q.values()) v = std::clamp(v, -l, l);
    return q;
}

Bitstream Codec::compress(const Tensor<float>& image, std::size_t lambda_index) const
{
    check_lambda_index(model().spec, lambda_index);
    if (image.rank() != 4 || image.dim(0) != 1 || image.dim(1) != 3) {
        throw ContractViolation("expected a [1, 3, H, W] image, got " + shape_str(image.shape()));
    }
    constexpr std::size_t kMaxSide = std::numeric_limits<std::uint16_t>::max();
    if (image.dim(2) > kMaxSide || image.dim(3) > kMaxSide) {
        throw ContractViolation("image sides are limited to " + std::to_string(kMaxSide) + " pixels");
    }
    if (lambda_index > std::numeric_limits<std::uint8_t>::max()) {
        throw ContractViolation("tradeoff index does not fit the header");
    }
    BitstreamMeta meta;
    meta.width = static_cast<std::uint16_t>(image.dim(3));
    meta.height = static_cast<std::uint16_t>(image.dim(2));
    meta.lambda_index = static_cast<std::uint8_t>(lambda_index);
    meta.flags = model().spec.kind == ModelKind::bottleneck ? kFlagBottleneckScaled : 0;
    meta.model_hash = hash_;
    return pack(quantized_latent(image, lambda_index), meta, tables_);
}

Tensor<float> Codec::decompress(const Bitstream& stream) const
{
    const Unpacked u = unpack(stream, tables_, hash_);
    const bool scaled = (u.meta.flags & kFlagBottleneckScaled) != 0;
    if (scaled != (model().spec.kind == ModelKind::bottleneck)) {
        throw FormatError("bottleneck-scaling flag does not match the model kind");
    }
    check_lambda_index(model().spec, u.meta.lambda_index);
    const std::size_t f = model().spec.arch.downsampling();
    const std::size_t h = u.meta.height, w = u.meta.width;
    if (u.q.dim(2) != (h + f - 1) / f || u.q.dim(3) != (w + f - 1) / f) {
        throw FormatError("latent shape " + shape_str(u.q.shape()) + " does not match image " + std::to_string(w) +
                          "x" + std::to_string(h));
    }
    const Tensor<float> y = u.q.cast<float>();
    return crop_image(synthesize(model(), y, u.meta.lambda_index), h, w);
}

double Codec::estimated_bits(const Tensor<float>& image, std::size_t lambda_index, std::mt19937_64& rng) const
{
    const Tensor<float> padded = pad_to_multiple(image, model().spec.arch.downsampling());
    Tensor<float> z = analyze(model(), padded, lambda_index);
    const Tensor<float> noise = uniform_noise<float>(z.shape(), rng);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += noise[i];
    Tape<float> tape;
    const auto psi = bind_constants(tape, model().params).entropy;
    return rate_bits(tape.borrow(z, false), psi).value()[0];
}

double bits_per_pixel(const Bitstream& stream)
{
    const double pixels = static_cast<double>(stream.header.width) * stream.header.height;
    return 8.0 * static_cast<double>(stream.total_bytes()) / pixels;
}

std::vector<RdPoint> rd_curve(std::span<const RdMethod> methods, std::span<const Tensor<float>> images)
{
    if (images.empty()) throw ContractViolation("rd_curve needs at least one image");
    std::vector<RdPoint> rows;
    for (const RdMethod& m : methods) {
        if (m.codecs.empty()) throw ContractViolation("method '" + m.name + "' has no checkpoint");
        const std::size_t first = rows.size();
        for (const Codec* codec : m.codecs) {
            const TradeoffSet& set = codec->model().spec.tradeoffs;
            for (std::size_t li = 0; li < set.size(); ++li) {
                RdPoint p{m.name, set.at(li), 0.0, 0.0, 0.0};
                for (const Tensor<float>& img : images) {
                    const Bitstream s = codec->compress(img, li);
                    const Tensor<float> rec = codec->decompress(s);
                    p.bpp += bits_per_pixel(s);
                    p.psnr_db += psnr(img, rec);
                    p.msssim_db += ms_ssim_db(ms_ssim(img, rec));
                }
                const double n = static_cast<double>(images.size());
                p.bpp /= n;
                p.psnr_db /= n;
                p.msssim_db /= n;
                rows.push_back(p);
            }
        }
        std::stable_sort(rows.begin() + static_cast<std::ptrdiff_t>(first), rows.end(),
                         [](const RdPoint& a, const RdPoint& b) { return a.bpp < b.bpp; });
    }
    return rows;
}

void write_rd_csv(std::ostream& out, std::span<const RdPoint> rows)
{
    out << kRdCsvHeader << '\n';
    for (const RdPoint& r : rows) {
        if (r.method.find_first_of(",\"\n") != std::string::npos) {
            throw ContractViolation("method name '" + r.method + "' cannot appear in CSV unquoted");
        }
        out << r.method << ',' << std::setprecision(17) << r.lambda << ',' << std::setprecision(9) << r.bpp << ','
            << r.psnr_db << ',' << r.msssim_db << '\n';
    }
}

std::vector<ChannelRatio> feature_ratio(const Model<float>& model, const Tensor<float>& image,
                                        std::size_t lambda_a, std::size_t lambda_b,
                                        std::span<const std::size_t> channels)
{
    check_lambda_index(model.spec, lambda_a);
    check_lambda_index(model.spec, lambda_b);
    for (std::size_t c : channels) {
        if (c >= model.spec.arch.channels) {
            throw ContractViolation("channel " + std::to_string(c) + " out of range for " +
                                    std::to_string(model.spec.arch.channels) + " bottleneck channels");
        }
    }
    const Tensor<float> padded = pad_to_multiple(image, model.spec.arch.downsampling());
    const Tensor<float> za = analyze(model, padded, lambda_a);
    const Tensor<float> zb = analyze(model, padded, lambda_b);
    const std::size_t h = za.dim(2), w = za.dim(3);

    std::vector<ChannelRatio> out;
    for (std::size_t c : channels) {
        ChannelRatio r;
        r.channel = c;
        std::vector<double> ratio(h * w, 0.0);
        std::vector<bool> valid(h * w, false);
        double sum = 0.0;
        r.min = std::numeric_limits<double>::infinity();
        r.max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < h * w; ++i) {
            const double b = zb.at(0, c, i / w, i % w);
            if (std::abs(b) < 1e-12) continue;
            ratio[i] = za.at(0, c, i / w, i % w) / b;
            valid[i] = true;
            ++r.positions;
            sum += ratio[i];
            r.min = std::min(r.min, ratio[i]);
            r.max = std::max(r.max, ratio[i]);
        }
        r.map = Tensor<float>({h, w}, 0.5f);
        if (r.positions == 0) {
            r.min = r.max = 0.0;
            out.push_back(std::move(r));
            continue;
        }
        const double mean = sum / static_cast<double>(r.positions);
        for (std::size_t i = 0; i < h * w; ++i)
            if (valid[i]) r.variance += (ratio[i] - mean) * (ratio[i] - mean);
        r.variance /= static_cast<double>(r.positions);
        const double span = r.max - r.min;
        for (std::size_t i = 0; i < h * w; ++i) {
            const double v = valid[i] ? ratio[i] : mean;
            r.map[i] = span > 0.0 ? static_cast<float>((v - r.min) / span) : 0.5f;
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace mae
