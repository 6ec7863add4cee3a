// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint format, all integers and floats little-endian:
//
//   "MAECKPT\0"                      8 bytes
//   version                          u32 (1)
//   model kind                       u8
//   channels, mod_hidden,
//   image_channels, stage count      u32 each
//   per stage: kernel, stride        u32 each
//   training iteration               u64
//   tradeoff count, tradeoffs        u32, f64 each
//   block count                      u32
//   per block: name length, name,    u16, bytes
//              rank, dims,           u8, u32 each
//              values                f32 each
//
// Blocks appear in visit_params order. The FNV-1a 64 digest of these bytes
// is the model hash carried by every bitstream.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mae/network.hpp"

namespace mae {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    Model<float> model;
    std::uint64_t iteration = 0;

    bool operator==(const Checkpoint& o) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c);

/// Throws FormatError on bad magic, version, truncation, or blocks that do
/// not match the shapes implied by the stored architecture.
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

std::uint64_t checkpoint_hash(const Checkpoint& c);

/// Writes to a sibling temporary and renames, so readers never see a partial file.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);

struct LoadedCheckpoint {
    Checkpoint checkpoint;
    std::uint64_t hash = 0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace mae
