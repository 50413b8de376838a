// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "rmap/grid.hpp"

namespace rmap {

// Dense rank-4 array in (batch, channel, height, width) order, row-major.
// The optional grad buffer, when non-empty, has exactly v.size() entries.
struct Tensor4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> v;
  std::vector<double> grad;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_);

  std::size_t size() const { return v.size(); }
  std::size_t idx(int b, int ch, int y, int x) const {
    return ((static_cast<std::size_t>(b) * c + ch) * h + y) * w + x;
  }
  double& at(int b, int ch, int y, int x) { return v[idx(b, ch, y, x)]; }
  double at(int b, int ch, int y, int x) const { return v[idx(b, ch, y, x)]; }

  // First element of channel plane (b, ch); planes are h*w contiguous values.
  double* plane(int b, int ch) { return v.data() + idx(b, ch, 0, 0); }
  const double* plane(int b, int ch) const { return v.data() + idx(b, ch, 0, 0); }

  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

// Stacks encoded regions into one batch tensor. All inputs must share the
// same spatial shape and channel count (mask either on everywhere or nowhere).
Tensor4 batch_from_inputs(const std::vector<EncodedInput>& inputs);

// Stacks single-channel grids into an (n, 1, h, w) tensor.
Tensor4 batch_from_grids(const std::vector<const Grid*>& grids);

// Extracts one channel plane as a Grid.
Grid plane_to_grid(const Tensor4& t, int b, int ch);

// Fails with ErrorKind::numerical when any value is NaN or infinite.
// `context` names the producing step for the diagnostic.
void ensure_finite(const Tensor4& t, const char* context);

}  // namespace rmap
