// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "rmap/grid.hpp"

namespace rmap {

// Inverse-distance weighting (Shepard), weights 1/d^power, exact at sample
// cells. Needs at least one sample; power must be positive.
Grid idw_interpolate(const SparseSamples& samples, int height, int width,
                     double power = 2.0);

// Radial basis kernels. eps is the shape parameter for gaussian
// (exp(-(eps*r)^2)) and multiquadric (sqrt(1 + (eps*r)^2)); thin_plate
// (r^2 log r) has no shape parameter and ignores eps.
enum class RbfKernel { gaussian, multiquadric, thin_plate };

struct RbfModel {
  RbfKernel kernel = RbfKernel::gaussian;
  double eps = 0.1;
  SparseSamples centers;
  std::vector<double> weights;
};

// Solves the K x K collocation system (plus `ridge` on the diagonal; with
// ridge = 0 the surface interpolates the samples exactly). A rank-deficient
// system raises ErrorKind::numerical.
RbfModel rbf_fit(const SparseSamples& samples, RbfKernel kernel, double eps,
                 double ridge = 0.0);
double rbf_eval(const RbfModel& model, Coord cell);
Grid rbf_interpolate(const SparseSamples& samples, int height, int width,
                     RbfKernel kernel = RbfKernel::gaussian, double eps = 0.1,
                     double ridge = 0.0);

// Isotropic exponential variogram
//   gamma(d) = nugget + sill * (1 - e^(-d/range))   for d > 0, gamma(0) = 0.
// `degenerate` marks an (almost) constant field for which kriging falls back
// to the sample mean.
struct VariogramModel {
  double nugget = 0.0;
  double sill = 1.0;   // coefficient of the exponential term
  double range = 1.0;  // cells
  bool degenerate = false;
  double mean_value = 0.0;
};

double variogram_gamma(const VariogramModel& model, double dist);

// Fits the exponential model to the binned empirical semivariogram: pairwise
// (distance, half squared difference) points binned into n_bins equal-width
// bins up to half the maximum pairwise distance, then nugget and sill by
// least squares over bin means for each candidate range (best range wins).
// Needs at least 3 samples.
VariogramModel fit_variogram(const SparseSamples& samples, int n_bins = 12);

// Ordinary kriging weights for one target cell: the (K+1) system with the
// unbiasedness constraint sum(lambda) = 1; mu is the Lagrange multiplier.
struct KrigingWeights {
  std::vector<double> lambda;
  double mu = 0.0;
};
KrigingWeights kriging_weights(const SparseSamples& samples,
                               const VariogramModel& model, Coord cell);

// Ordinary kriging surface: factors the sample system once and back-solves
// per cell. Exact at sample cells; constant mean for degenerate variograms.
Grid kriging_interpolate(const SparseSamples& samples, int height, int width,
                         int n_bins = 12);

}  // namespace rmap
