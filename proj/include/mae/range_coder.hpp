// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// 32-bit range coder with byte-wise renormalization and carry propagation
// over 16-bit cumulative frequency tables, plus the `.mae` container.
//
// Container layout (big-endian, 29-byte header):
//
//   offset  size  field
//        0     4  magic "MAE1"
//        4     1  version (1)
//        5     1  flags (bit 0: latent is bottleneck-scaled)
//        6     2  image width
//        8     2  image height
//       10     1  tradeoff index into the model's lambda table
//       11     2  latent channels
//       13     2  latent height
//       15     2  latent width
//       17     8  model hash (FNV-1a 64 of the checkpoint bytes)
//       25     4  payload length
//       29     *  range-coded payload, symbols in channel-major raster order

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mae/entropy.hpp"

namespace mae {

class RangeEncoder {
public:
    /// Codes the interval [start, start + freq) of a kCdfTotal-sized alphabet.
    void encode(std::uint32_t start, std::uint32_t freq);
    std::vector<std::uint8_t> finish();

private:
    void shift_low();

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> bytes);

    /// Cumulative-frequency target of the next symbol.
    std::uint32_t target();
    void consume(std::uint32_t start, std::uint32_t freq);
    std::size_t bytes_read() const noexcept { return pos_; }

private:
    std::uint8_t next_byte();

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::uint32_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint32_t step_ = 0;
};

/// Symbol i is coded with tables[i].
std::vector<std::uint8_t> rc_encode(std::span<const std::int32_t> symbols,
                                    std::span<const CdfTable* const> tables);

/// Decodes exactly tables.size() symbols; the payload must be consumed exactly.
std::vector<std::int32_t> rc_decode(std::span<const std::uint8_t> bytes,
                                    std::span<const CdfTable* const> tables);

/// sum of -log2(freq / kCdfTotal) over the sequence.
double cross_entropy_bits(std::span<const std::int32_t> symbols,
                          std::span<const CdfTable* const> tables);

inline constexpr std::array<std::uint8_t, 4> kBitstreamMagic = {'M', 'A', 'E', '1'};
inline constexpr std::uint8_t kBitstreamVersion = 1;
inline constexpr std::size_t kBitstreamHeaderSize = 29;
inline constexpr std::uint8_t kFlagBottleneckScaled = 0x01;

struct BitstreamHeader {
    std::uint8_t version = kBitstreamVersion;
    std::uint8_t flags = 0;
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::uint8_t lambda_index = 0;
    std::uint16_t channels = 0;
    std::uint16_t latent_height = 0;
    std::uint16_t latent_width = 0;
    std::uint64_t model_hash = 0;
    std::uint32_t payload_length = 0;

    bool operator==(const BitstreamHeader&) const = default;
};

struct Bitstream {
    BitstreamHeader header;
    std::vector<std::uint8_t> payload;

    std::size_t total_bytes() const { return kBitstreamHeaderSize + payload.size(); }
    bool operator==(const Bitstream&) const = default;
};

std::vector<std::uint8_t> serialize(const Bitstream& b);
/// Throws FormatError on bad magic, unknown version, or length mismatch.
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

/// Header fields other than the latent shape and payload.
struct BitstreamMeta {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::uint8_t lambda_index = 0;
    std::uint8_t flags = 0;
    std::uint64_t model_hash = 0;

    bool operator==(const BitstreamMeta&) const = default;
};

/// q is [1, C, h, w]; channel c is coded with tables.channels[c].
Bitstream pack(const Tensor<std::int32_t>& q, const BitstreamMeta& meta, const CdfTableSet& tables);

struct Unpacked {
    Tensor<std::int32_t> q;
    BitstreamMeta meta;
};

/// Throws FormatError if the header's model hash differs from expected_hash.
Unpacked unpack(const Bitstream& b, const CdfTableSet& tables, std::uint64_t expected_hash);

/// FNV-1a 64-bit digest.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

} // namespace mae
