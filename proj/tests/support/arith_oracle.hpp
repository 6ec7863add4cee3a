// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bit-wise integer arithmetic coder in the classic Witten-Neal-Cleary form,
// used as a second implementation to cross-check the range coder. Shares
// nothing with src/ except the CdfTable layout.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mae/entropy.hpp"

namespace mae::testing {

class ArithOracle {
public:
    static constexpr int kBits = 32;
    static constexpr std::uint64_t kTop = (std::uint64_t{1} << kBits) - 1;
    static constexpr std::uint64_t kHalf = std::uint64_t{1} << (kBits - 1);
    static constexpr std::uint64_t kQuarter = kHalf >> 1;

    static std::vector<std::uint8_t> encode(std::span<const std::int32_t> symbols,
                                            std::span<const CdfTable* const> tables)
    {
        BitWriter out;
        std::uint64_t low = 0, high = kTop, pending = 0;
        auto emit = [&](int bit) {
            out.put(bit);
            for (; pending > 0; --pending) out.put(!bit);
        };
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            const CdfTable& t = *tables[i];
            const auto s = static_cast<std::size_t>(symbols[i] - t.min_symbol);
            const std::uint64_t span = high - low + 1;
            high = low + span * t.cdf[s + 1] / kCdfTotal - 1;
            low = low + span * t.cdf[s] / kCdfTotal;
            for (;;) {
                if (high < kHalf) {
                    emit(0);
                } else if (low >= kHalf) {
                    emit(1);
                    low -= kHalf;
                    high -= kHalf;
                } else if (low >= kQuarter && high < kHalf + kQuarter) {
                    ++pending;
                    low -= kQuarter;
                    high -= kQuarter;
                } else {
                    break;
                }
                low <<= 1;
                high = (high << 1) | 1;
            }
        }
        ++pending;
        emit(low < kQuarter ? 0 : 1);
        return out.bytes;
    }

    static std::vector<std::int32_t> decode(std::span<const std::uint8_t> bytes,
                                            std::span<const CdfTable* const> tables)
    {
        BitReader in{bytes};
        std::uint64_t low = 0, high = kTop, code = 0;
        for (int i = 0; i < kBits; ++i) code = (code << 1) | in.get();
        std::vector<std::int32_t> out;
        for (const CdfTable* tp : tables) {
            const CdfTable& t = *tp;
            const std::uint64_t span = high - low + 1;
            const std::uint64_t target = ((code - low + 1) * kCdfTotal - 1) / span;
            std::size_t s = 0;
            while (t.cdf[s + 1] <= target) ++s;
            out.push_back(t.min_symbol + static_cast<std::int32_t>(s));
            high = low + span * t.cdf[s + 1] / kCdfTotal - 1;
            low = low + span * t.cdf[s] / kCdfTotal;
            for (;;) {
                if (high < kHalf) {
                } else if (low >= kHalf) {
                    low -= kHalf;
                    high -= kHalf;
                    code -= kHalf;
                } else if (low >= kQuarter && high < kHalf + kQuarter) {
                    low -= kQuarter;
                    high -= kQuarter;
                    code -= kQuarter;
                } else {
                    break;
                }
                low <<= 1;
                high = (high << 1) | 1;
                code = (code << 1) | in.get();
            }
        }
        return out;
    }

private:
    struct BitWriter {
        std::vector<std::uint8_t> bytes;
        int used = 8;
        void put(int bit)
        {
            if (used == 8) {
                bytes.push_back(0);
                used = 0;
            }
            if (bit) bytes.back() |= static_cast<std::uint8_t>(0x80 >> used);
            ++used;
        }
    };

    struct BitReader {
        std::span<const std::uint8_t> bytes;
        std::size_t pos = 0;
        // Reads past the end as zeros.
        int get()
        {
            const std::size_t byte = pos >> 3;
            const int bit = byte < bytes.size() ? (bytes[byte] >> (7 - (pos & 7))) & 1 : 0;
            ++pos;
            return bit;
        }
    };
};

} // namespace mae::testing
