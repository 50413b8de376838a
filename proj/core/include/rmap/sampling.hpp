// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include "rmap/dft.hpp"
#include "rmap/grid.hpp"
#include "rmap/rng.hpp"

namespace rmap {

// Drawing regimes for sparse observations of a ground-truth map. All three
// draw cells without replacement and return coordinates sorted by (row, col);
// the psd value is the ground-truth value at the drawn cell. Identical seeds
// give identical sample sets.

// K = round(ratio * H * W) cells, uniform over the whole grid.
// ratio must lie in (0, 1].
SparseSamples sample_uniform(const Grid& ground_truth, double ratio, Rng& rng);

// Uniform regime with the ratio itself drawn from U[ratio_lo, ratio_hi],
// so per-region densities differ across a dataset.
SparseSamples sample_unbalanced(const Grid& ground_truth, double ratio_lo,
                                double ratio_hi, Rng& rng);

// Splits the grid by a random line through the grid center (angle uniform in
// [0, pi)) and samples each side at its own ratio. Side A is the side with
// negative signed cross product, which for a vertical line is the left half;
// cells exactly on the line count as side B. Ratios in [0, 1], not both 0.
SparseSamples sample_split(const Grid& ground_truth, double ratio_a,
                           double ratio_b, Rng& rng);

// Superpixel partition of the grid.
// labels are row-major, compact (every value in [0, n_labels) occurs) and
// each label forms one 4-connected component.
struct SuperpixelLabels {
  int height = 0;
  int width = 0;
  int n_labels = 0;
  std::vector<int> labels;

  int label(int r, int c) const {
    return labels[static_cast<std::size_t>(r) * width + c];
  }
};

// SLIC-style clustering in the scaled feature space
//   (value / compactness, row / S, col / S),  S = sqrt(H*W / n_segments).
// Seeds sit on a regular grid; iters counts center updates, so iters = 0 is
// plain nearest-seed assignment in that metric. Larger compactness weighs
// the value less and yields more regular cells. A connectivity pass then
// merges stray fragments and compacts label ids, so n_labels <= n_segments.
SuperpixelLabels superpixels(const Grid& feature, int n_segments,
                             double compactness = 10.0, int iters = 10);

// Keeps exactly the peak observation per superpixel: for each label with at
// least one sample, the sample of maximum psd survives (ties: smallest
// row-major index). Output ordered by ascending label; psd values are a
// subset of the input values.
SparseSamples geometric_downsample(const SparseSamples& samples,
                                   const SuperpixelLabels& labels);

// The n_f bins of an H x W spectrum with the highest aliased radial
// frequency sqrt(fold(u,H)^2 + fold(v,W)^2), ties broken by ascending
// (u, v). Depends only on the shape, not on any map contents.
std::vector<FreqBin> high_freq_indices(int height, int width, int n_f);

// DFT coefficients of `map` at those bins, in the same order.
struct FreqSelection {
  int height = 0;
  int width = 0;
  std::vector<FreqBin> bins;
  std::vector<std::complex<double>> coeffs;
};
FreqSelection high_freq_select(const Grid& map, int n_f);

}  // namespace rmap
