// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rmap/grid.hpp"
#include "rmap/losses.hpp"

namespace rmap {

// Multi-scale structural similarity for unit-range grids (L = 1).
//
// Per level: 11x11 Gaussian window (sigma 1.5) local statistics, windows
// truncated and renormalized at borders; the contrast and structure terms
// combine into (2*sigma_uv + C2) / (sigma_u^2 + sigma_v^2 + C2) per cell.
// Levels connect by 2x2 mean pooling (floor-cropped). The luminance term
// enters at the coarsest level only; all exponents are 1/levels; level
// means clamp at 0 before exponentiation.
//
// Symmetric in (u, v), equals 1 exactly iff u == v, and never exceeds 1.
// Requires min(H, W) >= 8 * 2^(levels-1), else a parameter error.
double ms_ssim(const Grid& u, const Grid& v, int levels = 3);

// l_ssim = 1 - ms_ssim(estimate, target), gradient w.r.t. the estimate
// analytic through every term (zero through a clamped level, as the
// subgradient choice).
LossTerm l_ssim(const Grid& estimate, const Grid& target, int levels = 3);

}  // namespace rmap
