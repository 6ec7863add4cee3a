// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "mae/errors.hpp"

#ifdef MAE_HAVE_PNG
#include <png.h>
#endif

namespace mae {

namespace {

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

void check_image_shape(const Tensor<float>& image)
{
    const Shape& s = image.shape();
    if (s.size() != 4 || s[0] != 1 || s[1] != 3 || s[2] == 0 || s[3] == 0) {
        throw ContractViolation("expected a [1, 3, H, W] image, got " + shape_str(s));
    }
}

bool has_png_signature(const std::string& bytes)
{
    static const char sig[] = {'\x89', 'P', 'N', 'G'};
    return bytes.size() >= 4 && std::equal(sig, sig + 4, bytes.begin());
}

#ifdef MAE_HAVE_PNG
Tensor<float> decode_png(const std::string& bytes, const std::string& name)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
        throw FormatError(name + ": " + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, rgb.data(), 0, nullptr)) {
        throw FormatError(name + ": " + img.message);
    }
    const std::size_t h = img.height, w = img.width;
    Tensor<float> out({1, 3, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) out.at(0, c, y, x) = rgb[(y * w + x) * 3 + c] / 255.0f;
    return out;
}

void write_png(const std::filesystem::path& path, const Tensor<float>& image)
{
    const std::size_t h = image.dim(2), w = image.dim(3);
    std::vector<std::uint8_t> rgb(h * w * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) rgb[(y * w + x) * 3 + c] = to_byte(image.at(0, c, y, x));
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, rgb.data(), 0, nullptr)) {
        throw FormatError(path.string() + ": " + img.message);
    }
}
#endif

// Skips whitespace and '#' comments between PPM header tokens.
std::size_t next_token(const std::string& s, std::size_t& pos)
{
    for (;;) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos < s.size() && s[pos] == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    std::size_t v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        v = v * 10 + static_cast<std::size_t>(s[pos] - '0');
        if (v > (1u << 20)) throw FormatError("ppm header value too large");
        ++pos;
    }
    if (pos == start) throw FormatError("malformed ppm header");
    return v;
}

} // namespace

bool png_supported()
{
#ifdef MAE_HAVE_PNG
    return true;
#else
    return false;
#endif
}

std::uint8_t to_byte(float v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

Tensor<float> decode_ppm(const std::string& bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
        throw FormatError("not a binary ppm (P6) file");
    }
    std::size_t pos = 2;
    const std::size_t w = next_token(bytes, pos);
    const std::size_t h = next_token(bytes, pos);
    const std::size_t maxval = next_token(bytes, pos);
    if (maxval != 255) throw FormatError("only 8-bit ppm (maxval 255) is supported");
    if (w == 0 || h == 0) throw FormatError("ppm has zero extent");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw FormatError("malformed ppm header");
    }
    ++pos;
    if (bytes.size() - pos < w * h * 3) {
        throw FormatError("ppm pixel data truncated: expected " + std::to_string(w * h * 3) +
                          " bytes, found " + std::to_string(bytes.size() - pos));
    }
    Tensor<float> out({1, 3, h, w});
    const auto* px = reinterpret_cast<const std::uint8_t*>(bytes.data() + pos);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) out.at(0, c, y, x) = px[(y * w + x) * 3 + c] / 255.0f;
    return out;
}

std::string encode_ppm(const Tensor<float>& image)
{
    check_image_shape(image);
    const std::size_t h = image.dim(2), w = image.dim(3);
    std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + w * h * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                out[header + (y * w + x) * 3 + c] = static_cast<char>(to_byte(image.at(0, c, y, x)));
    return out;
}

Tensor<float> read_image(const std::filesystem::path& path)
{
    const std::string bytes = read_file(path);
    if (has_png_signature(bytes)) {
#ifdef MAE_HAVE_PNG
        return decode_png(bytes, path.string());
#else
        throw FormatError(path.string() + ": PNG support was not compiled in");
#endif
    }
    try {
        return decode_ppm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_image(const std::filesystem::path& path, const Tensor<float>& image)
{
    check_image_shape(image);
    if (path.extension() == ".png") {
#ifdef MAE_HAVE_PNG
        write_png(path, image);
        return;
#else
        throw FormatError(path.string() + ": PNG support was not compiled in");
#endif
    }
    write_file(path, encode_ppm(image));
}

void write_gray_ppm(const std::filesystem::path& path, const Tensor<float>& gray)
{
    if (gray.rank() != 2) throw ContractViolation("gray map must be [H, W], got " + shape_str(gray.shape()));
    const std::size_t h = gray.dim(0), w = gray.dim(1);
    Tensor<float> rgb({1, 3, h, w});
    for (std::size_t c = 0; c < 3; ++c)
        std::copy(gray.data(), gray.data() + h * w, rgb.data() + c * h * w);
    write_file(path, encode_ppm(rgb));
}

Tensor<float> synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    constexpr double kTau = 2.0 * std::numbers::pi;
    const double w = static_cast<double>(width), h = static_cast<double>(height);
    Tensor<float> img({1, 3, height, width});

    // Smooth background: a few low-frequency plane waves per channel.
    struct Wave {
        double fx, fy, phase, amp;
    };
    std::vector<Wave> waves[3];
    double base[3];
    for (int c = 0; c < 3; ++c) {
        base[c] = 0.25 + 0.5 * u(rng);
        for (int k = 0; k < 3; ++k)
            waves[c].push_back({(u(rng) * 3 - 1.5) / w, (u(rng) * 3 - 1.5) / h, u(rng) * kTau,
                                0.08 + 0.1 * u(rng)});
    }

    enum class Kind { rect, ellipse, grating };
    struct Shape2d {
        Kind kind;
        double cx, cy, rx, ry, angle, freq, alpha;
        double color[3];
    };
    std::vector<Shape2d> shapes;
    const int n_shapes = 6 + static_cast<int>(rng() % 7);
    for (int i = 0; i < n_shapes; ++i) {
        Shape2d s{};
        const auto pick = rng() % 5;
        s.kind = pick < 2 ? Kind::rect : pick < 4 ? Kind::ellipse : Kind::grating;
        s.cx = u(rng) * w;
        s.cy = u(rng) * h;
        s.rx = (0.05 + 0.25 * u(rng)) * w;
        s.ry = (0.05 + 0.25 * u(rng)) * h;
        s.angle = u(rng) * std::numbers::pi;
        s.freq = kTau / (3.0 + 12.0 * u(rng));
        s.alpha = 0.5 + 0.5 * u(rng);
        for (double& c : s.color) c = u(rng);
        shapes.push_back(s);
    }

    // Fine texture: bilinear value noise on a 4-pixel lattice.
    const std::size_t cell = 4;
    const std::size_t lw = width / cell + 2, lh = height / cell + 2;
    std::vector<double> lattice(lw * lh);
    for (auto& v : lattice) v = u(rng) - 0.5;
    const double texture_amp = 0.04 + 0.06 * u(rng);

    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double px[3];
            for (int c = 0; c < 3; ++c) {
                double v = base[c];
                for (const auto& wv : waves[c]) v += wv.amp * std::sin(kTau * (wv.fx * x + wv.fy * y) + wv.phase);
                px[c] = v;
            }
            for (const auto& s : shapes) {
                const double dx = x - s.cx, dy = y - s.cy;
                const double ca = std::cos(s.angle), sa = std::sin(s.angle);
                const double lx = (ca * dx + sa * dy) / s.rx, ly = (-sa * dx + ca * dy) / s.ry;
                bool inside = false;
                double shade = 1.0;
                switch (s.kind) {
                case Kind::rect:
                    inside = std::abs(lx) <= 1 && std::abs(ly) <= 1;
                    break;
                case Kind::ellipse:
                    inside = lx * lx + ly * ly <= 1;
                    shade = 1.0 - 0.3 * (lx * lx + ly * ly);
                    break;
                case Kind::grating:
                    inside = std::abs(lx) <= 1 && std::abs(ly) <= 1;
                    shade = 0.5 + 0.5 * std::sin(s.freq * (ca * dx + sa * dy));
                    break;
                }
                if (!inside) continue;
                for (int c = 0; c < 3; ++c) px[c] += s.alpha * (s.color[c] * shade - px[c]);
            }
            const double gx = static_cast<double>(x) / cell, gy = static_cast<double>(y) / cell;
            const std::size_t ix = static_cast<std::size_t>(gx), iy = static_cast<std::size_t>(gy);
            const double fx = gx - ix, fy = gy - iy;
            const double n = (1 - fy) * ((1 - fx) * lattice[iy * lw + ix] + fx * lattice[iy * lw + ix + 1]) +
                             fy * ((1 - fx) * lattice[(iy + 1) * lw + ix] + fx * lattice[(iy + 1) * lw + ix + 1]);
            for (int c = 0; c < 3; ++c)
                img.at(0, c, y, x) = static_cast<float>(std::clamp(px[c] + texture_amp * n, 0.0, 1.0));
        }
    }
    return img;
}

} // namespace mae
