// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "rmap/grid.hpp"

namespace rmap {

// Frequency bin index, u along rows, v along columns, both in
// [0, height) x [0, width).
struct FreqBin {
  int u = 0;
  int v = 0;

  auto operator<=>(const FreqBin&) const = default;
};

// Unnormalized forward 2-D DFT,
//   X(u,v) = sum_{r,c} x(r,c) exp(-2*pi*i*(u*r/H + v*c/W)),
// output row-major (u * width + v). Separable row/column evaluation with
// precomputed twiddle tables, O(HW(H+W)); no size restrictions.
std::vector<std::complex<double>> dft2(const Grid& g);

// Adjoint of sparse DFT evaluation: spreads coefficients back to space,
//   out(r,c) = Re( sum_k z_k * exp(+2*pi*i*(u_k*r/H + v_k*c/W)) ),
// without the 1/(HW) inverse scaling. Used for gradients of spectral losses.
Grid dft2_adjoint(const std::vector<FreqBin>& bins,
                  const std::vector<std::complex<double>>& coeffs, int height,
                  int width);

// Distance from bin index k to the nearest multiple of n, i.e. the aliased
// (centered) frequency magnitude of that axis index.
int folded_frequency(int k, int n);

}  // namespace rmap
