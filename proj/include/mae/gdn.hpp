// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Generalized divisive normalization and its multiplicative counterpart:
//
//   gdn:  y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)
//   igdn: y_i = x_i * sqrt(beta_i + sum_j gamma_ij x_j^2)
//
// evaluated independently at every spatial site of an NCHW tensor.

#pragma once

#include <cstddef>

#include "mae/autodiff.hpp"

namespace mae {

inline constexpr double kBetaFloor = 1e-6;

/// beta: [C], gamma: [C, C]. Slot is Tensor<T> for storage or Var<T> on a tape.
template <class Slot>
struct GdnSlots {
    Slot beta;
    Slot gamma;
};

template <class T>
using GdnParams = GdnSlots<Tensor<T>>;

/// beta = 1, gamma = 0.1 * I.
template <class T>
GdnParams<T> gdn_init(std::size_t channels);

/// Clamps beta to kBetaFloor and gamma to zero from below.
template <class T>
void gdn_project(GdnParams<T>& p);

template <class T>
Var<T> gdn_forward(const Var<T>& x, const GdnSlots<Var<T>>& p);

template <class T>
Var<T> igdn_forward(const Var<T>& x, const GdnSlots<Var<T>>& p);

} // namespace mae
