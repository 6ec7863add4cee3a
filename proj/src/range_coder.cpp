// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#include "mae/range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mae {

namespace {

constexpr std::uint32_t kTop = 1u << 24;

const CdfTable& checked_table(std::span<const CdfTable* const> tables, std::size_t i)
{
    if (!tables[i] || tables[i]->symbol_count() == 0) {
        throw CodingError("missing cdf table for symbol " + std::to_string(i));
    }
    return *tables[i];
}

std::size_t symbol_slot(const CdfTable& t, std::int32_t symbol, std::size_t index)
{
    if (symbol < t.min_symbol || symbol > t.max_symbol()) {
        throw CodingError("symbol " + std::to_string(symbol) + " at element " +
                          std::to_string(index) + " outside table range [" +
                          std::to_string(t.min_symbol) + ", " + std::to_string(t.max_symbol()) +
                          "]");
    }
    return static_cast<std::size_t>(symbol - t.min_symbol);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint64_t get_be(std::span<const std::uint8_t> b, std::size_t off, std::size_t n)
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v = (v << 8) | b[off + i];
    return v;
}

} // namespace

// ---------------------------------------------------------------------------

void RangeEncoder::shift_low()
{
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
        const auto carry = static_cast<std::uint8_t>(low_ >> 32);
        std::uint8_t pending = cache_;
        do {
            out_.push_back(static_cast<std::uint8_t>(pending + carry));
            pending = 0xFF;
        } while (--cache_size_ != 0);
        cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(std::uint32_t start, std::uint32_t freq)
{
    const std::uint32_t r = range_ >> kCdfPrecisionBits;
    low_ += static_cast<std::uint64_t>(start) * r;
    range_ = freq * r;
    while (range_ < kTop) {
        range_ <<= 8;
        shift_low();
    }
}

std::vector<std::uint8_t> RangeEncoder::finish()
{
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes)
{
    for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte()
{
    if (pos_ >= bytes_.size()) {
        throw CodingError("range decoder ran past the end of a " + std::to_string(bytes_.size()) +
                          "-byte payload");
    }
    return bytes_[pos_++];
}

std::uint32_t RangeDecoder::target()
{
    step_ = range_ >> kCdfPrecisionBits;
    return std::min(code_ / step_, kCdfTotal - 1);
}

void RangeDecoder::consume(std::uint32_t start, std::uint32_t freq)
{
    code_ -= start * step_;
    range_ = freq * step_;
    while (range_ < kTop) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
}

std::vector<std::uint8_t> rc_encode(std::span<const std::int32_t> symbols,
                                    std::span<const CdfTable* const> tables)
{
    if (symbols.size() != tables.size()) {
        throw CodingError("rc_encode got " + std::to_string(symbols.size()) + " symbols but " +
                          std::to_string(tables.size()) + " tables");
    }
    RangeEncoder enc;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const CdfTable& t = checked_table(tables, i);
        const std::size_t s = symbol_slot(t, symbols[i], i);
        enc.encode(t.cdf[s], t.frequency(s));
    }
    return enc.finish();
}

std::vector<std::int32_t> rc_decode(std::span<const std::uint8_t> bytes,
                                    std::span<const CdfTable* const> tables)
{
    RangeDecoder dec(bytes);
    std::vector<std::int32_t> out(tables.size());
    for (std::size_t i = 0; i < tables.size(); ++i) {
        const CdfTable& t = checked_table(tables, i);
        const std::uint32_t target = dec.target();
        // Largest slot with cdf[slot] <= target.
        const auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), target);
        const auto slot = static_cast<std::size_t>(std::distance(t.cdf.begin(), it)) - 1;
        if (slot >= t.symbol_count()) throw CodingError("corrupt payload at symbol " + std::to_string(i));
        dec.consume(t.cdf[slot], t.frequency(slot));
        out[i] = t.min_symbol + static_cast<std::int32_t>(slot);
    }
    if (dec.bytes_read() != bytes.size()) {
        throw CodingError("decoded " + std::to_string(tables.size()) + " symbols from " +
                          std::to_string(dec.bytes_read()) + " of " + std::to_string(bytes.size()) +
                          " payload bytes; symbol count does not match the payload");
    }
    return out;
}

double cross_entropy_bits(std::span<const std::int32_t> symbols,
                          std::span<const CdfTable* const> tables)
{
    double bits = 0.0;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const CdfTable& t = checked_table(tables, i);
        const std::size_t s = symbol_slot(t, symbols[i], i);
        bits -= std::log2(static_cast<double>(t.frequency(s)) / kCdfTotal);
    }
    return bits;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize(const Bitstream& b)
{
    if (b.header.payload_length != b.payload.size()) {
        throw FormatError("header payload length " + std::to_string(b.header.payload_length) +
                          " does not match payload size " + std::to_string(b.payload.size()));
    }
    std::vector<std::uint8_t> out(kBitstreamMagic.begin(), kBitstreamMagic.end());
    out.reserve(kBitstreamHeaderSize + b.payload.size());
    out.push_back(b.header.version);
    out.push_back(b.header.flags);
    put_u16(out, b.header.width);
    put_u16(out, b.header.height);
    out.push_back(b.header.lambda_index);
    put_u16(out, b.header.channels);
    put_u16(out, b.header.latent_height);
    put_u16(out, b.header.latent_width);
    put_u64(out, b.header.model_hash);
    put_u32(out, b.header.payload_length);
    out.insert(out.end(), b.payload.begin(), b.payload.end());
    return out;
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kBitstreamHeaderSize) {
        throw FormatError("bitstream of " + std::to_string(bytes.size()) +
                          " bytes is shorter than the 29-byte header");
    }
    if (!std::equal(kBitstreamMagic.begin(), kBitstreamMagic.end(), bytes.begin())) {
        throw FormatError("bad magic: not a MAE1 bitstream");
    }
    Bitstream b;
    auto& h = b.header;
    h.version = bytes[4];
    if (h.version != kBitstreamVersion) {
        throw FormatError("unsupported bitstream version " + std::to_string(h.version));
    }
    h.flags = bytes[5];
    h.width = static_cast<std::uint16_t>(get_be(bytes, 6, 2));
    h.height = static_cast<std::uint16_t>(get_be(bytes, 8, 2));
    h.lambda_index = bytes[10];
    h.channels = static_cast<std::uint16_t>(get_be(bytes, 11, 2));
    h.latent_height = static_cast<std::uint16_t>(get_be(bytes, 13, 2));
    h.latent_width = static_cast<std::uint16_t>(get_be(bytes, 15, 2));
    h.model_hash = get_be(bytes, 17, 8);
    h.payload_length = static_cast<std::uint32_t>(get_be(bytes, 25, 4));
    if (bytes.size() - kBitstreamHeaderSize != h.payload_length) {
        throw FormatError("payload length field says " + std::to_string(h.payload_length) +
                          " bytes but " + std::to_string(bytes.size() - kBitstreamHeaderSize) +
                          " follow the header");
    }
    b.payload.assign(bytes.begin() + kBitstreamHeaderSize, bytes.end());
    return b;
}

Bitstream pack(const Tensor<std::int32_t>& q, const BitstreamMeta& meta, const CdfTableSet& tables)
{
    const Shape& s = q.shape();
    if (s.size() != 4 || s[0] != 1) {
        throw ContractViolation("pack expects a [1, C, h, w] latent, got " + shape_str(s));
    }
    if (s[1] != tables.channels.size()) {
        throw ContractViolation("latent has " + std::to_string(s[1]) + " channels but " +
                                std::to_string(tables.channels.size()) + " cdf tables were given");
    }
    if (s[1] > 0xFFFF || s[2] > 0xFFFF || s[3] > 0xFFFF) {
        throw ContractViolation("latent shape " + shape_str(s) + " exceeds 16-bit header fields");
    }
    const std::size_t plane = s[2] * s[3];
    std::vector<const CdfTable*> refs(q.size());
    for (std::size_t c = 0; c < s[1]; ++c)
        std::fill_n(refs.begin() + static_cast<std::ptrdiff_t>(c * plane), plane,
                    &tables.channels[c]);

    Bitstream b;
    b.payload = rc_encode(q.values(), refs);
    b.header.flags = meta.flags;
    b.header.width = meta.width;
    b.header.height = meta.height;
    b.header.lambda_index = meta.lambda_index;
    b.header.channels = static_cast<std::uint16_t>(s[1]);
    b.header.latent_height = static_cast<std::uint16_t>(s[2]);
    b.header.latent_width = static_cast<std::uint16_t>(s[3]);
    b.header.model_hash = meta.model_hash;
    b.header.payload_length = static_cast<std::uint32_t>(b.payload.size());
    return b;
}

Unpacked unpack(const Bitstream& b, const CdfTableSet& tables, std::uint64_t expected_hash)
{
    const auto& h = b.header;
    if (h.model_hash != expected_hash) {
        throw FormatError("model hash mismatch: bitstream was written by a different checkpoint");
    }
    if (h.channels != tables.channels.size()) {
        throw FormatError("bitstream has " + std::to_string(h.channels) +
                          " latent channels but the model has " +
                          std::to_string(tables.channels.size()));
    }
    const std::size_t plane = std::size_t{h.latent_height} * h.latent_width;
    std::vector<const CdfTable*> refs(plane * h.channels);
    for (std::size_t c = 0; c < h.channels; ++c)
        std::fill_n(refs.begin() + static_cast<std::ptrdiff_t>(c * plane), plane,
                    &tables.channels[c]);
    auto symbols = rc_decode(b.payload, refs);
    Unpacked u{Tensor<std::int32_t>(Shape{1, h.channels, h.latent_height, h.latent_width},
                                    std::move(symbols)),
               BitstreamMeta{h.width, h.height, h.lambda_index, h.flags, h.model_hash}};
    return u;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace mae
