// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Quantization, the additive-noise training proxy and the factorized
// entropy model used to estimate (and later code) the bottleneck.
//
// Each latent channel owns a monotone cumulative c(t) = sigmoid(l(t)),
// where l is a chain of three small affine stages:
//
//   h1 = softplus(H1) t  + b1          (1 -> 3)
//   f1 = h1 + tanh(a1) * tanh(h1)
//   h2 = softplus(H2) f1 + b2          (3 -> 3)
//   f2 = h2 + tanh(a2) * tanh(h2)
//   l  = softplus(H3) f2 + b3          (3 -> 1)
//
// Positive stage weights and |tanh(a)| < 1 make every stage nondecreasing.
// The bin probability of integer v is c(v + 1/2) - c(v - 1/2).

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mae/autodiff.hpp"

namespace mae {

inline constexpr double kProbabilityFloor = 1.0 / (1 << 24);
inline constexpr int kDefaultSupport = 255;
inline constexpr std::uint32_t kCdfPrecisionBits = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecisionBits;

template <class Slot>
struct DensitySlots {
    Slot H1;  // [C, 3]
    Slot H2;  // [C, 3, 3]
    Slot H3;  // [C, 3]
    Slot b1;  // [C, 3]
    Slot b2;  // [C, 3]
    Slot b3;  // [C]
    Slot a1;  // [C, 3]
    Slot a2;  // [C, 3]

    template <class Fn>
    void for_each(Fn&& fn)
    {
        fn("H1", H1);
        fn("H2", H2);
        fn("H3", H3);
        fn("b1", b1);
        fn("b2", b2);
        fn("b3", b3);
        fn("a1", a1);
        fn("a2", a2);
    }
};

template <class T>
using FactorizedDensity = DensitySlots<Tensor<T>>;

inline constexpr std::size_t kDensityParamsPerChannel = 3 + 9 + 3 + 3 + 3 + 1 + 3 + 3;

/// Initial cumulative is roughly a logistic of scale `init_scale`.
template <class T>
FactorizedDensity<T> density_init(std::size_t channels, std::mt19937_64& rng,
                                  double init_scale = 10.0);

template <class T>
std::size_t density_channels(const FactorizedDensity<T>& psi)
{
    return psi.b3.size();
}

/// Round to nearest, ties away from zero.
template <class T>
Tensor<std::int32_t> quantize(const Tensor<T>& z);

/// iid U[-0.5, 0.5) samples.
template <class T>
Tensor<T> uniform_noise(const Shape& shape, std::mt19937_64& rng);

/// z + u with u ~ U[-0.5, 0.5) held constant on the tape.
template <class T>
Var<T> noise_proxy(const Var<T>& z, std::mt19937_64& rng);

/// c_channel(t), evaluated in double precision.
template <class T>
double cumulative(const FactorizedDensity<T>& psi, std::size_t channel, double t);

/// max(c(v + 1/2) - c(v - 1/2), floor) for an arbitrary cumulative.
double bin_probability(const std::function<double(double)>& cdf, double v);

/// Bin probabilities of every element of v ([N, C, ...]) under psi.
template <class T>
Tensor<double> density_eval(const Tensor<T>& v, const FactorizedDensity<T>& psi);

/// Differentiable bin probabilities (floored; no gradient where floored).
template <class T>
Var<T> likelihood(const Var<T>& v, const DensitySlots<Var<T>>& psi);

/// sum(-log2 p).
template <class T>
Var<T> rate_bits(const Var<T>& likelihoods);

template <class T>
Var<T> rate_bits(const Var<T>& z_tilde, const DensitySlots<Var<T>>& psi)
{
    return rate_bits(likelihood(z_tilde, psi));
}

/// Integer-frequency model of one channel over symbols [min_symbol, min_symbol + n).
struct CdfTable {
    std::int32_t min_symbol = 0;
    std::vector<std::uint32_t> cdf;  // n + 1 entries, cdf[0] = 0, cdf[n] = kCdfTotal

    std::size_t symbol_count() const { return cdf.empty() ? 0 : cdf.size() - 1; }
    std::int32_t max_symbol() const
    {
        return min_symbol + static_cast<std::int32_t>(symbol_count()) - 1;
    }
    std::uint32_t frequency(std::size_t i) const { return cdf[i + 1] - cdf[i]; }

    bool operator==(const CdfTable&) const = default;
};

struct CdfTableSet {
    int support = kDefaultSupport;
    std::vector<CdfTable> channels;

    bool operator==(const CdfTableSet&) const = default;
};

/// Quantizes probabilities to 16-bit frequencies: each at least 1, the
/// remainder handed out by largest fractional residual (ties to the lower index).
CdfTable build_cdf_table(std::span<const double> probabilities, std::int32_t min_symbol);

/// Tables over [-support, support] with the tails folded into the edge bins.
/// Throws RangeError when the support holds less than 1 - 1e-6 of some
/// channel's mass.
template <class T>
CdfTableSet build_cdf_tables(const FactorizedDensity<T>& psi, int support);

/// build_cdf_tables starting at `support`, doubling (2L+1) until the mass check passes.
template <class T>
CdfTableSet build_cdf_tables_auto(const FactorizedDensity<T>& psi,
                                  int support = kDefaultSupport);

/// Probability mass of channel inside [-support - 1/2, support + 1/2].
template <class T>
double support_mass(const FactorizedDensity<T>& psi, std::size_t channel, int support);

} // namespace mae
