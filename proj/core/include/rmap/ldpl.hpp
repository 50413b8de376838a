// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "rmap/grid.hpp"

namespace rmap {

// Distances shorter than half a cell clamp to this floor so the log-distance
// model stays finite at the transmitter cell. Shared by the scene generator
// and the estimator; changing one side silently biases the other.
inline constexpr double kDistanceFloorCells = 0.5;

// Log-distance decay parameters, one (alpha, theta) pair per transmitter.
// Units follow the samples the model was fit on: fitting on normalized psd
// yields alpha in normalized units and theta scaled by the window width.
struct LdplParams {
  std::vector<double> alpha;
  std::vector<double> theta;

  int n_tx() const { return static_cast<int>(alpha.size()); }
};

// How per-transmitter contributions combine into one cell value.
//   db_sum        plain sum of the per-transmitter terms (the fitting model)
//   linear_power  10*log10(sum of 10^(term/10)); matches the scene generator
enum class TxAggregate { db_sum, linear_power };

// alpha_k - 10 * theta_k * log10(max(dist_k, floor)) summed per `agg`.
double ldpl_predict(const LdplParams& params, const TransmitterSet& tx,
                    Coord cell, TxAggregate agg = TxAggregate::db_sum);

struct LdplFit {
  LdplParams params;
  double residual_norm = 0.0;  // ||A x - y||_2 over the samples
  bool ridge_used = false;     // min-norm ridge path (multi-transmitter)
};

// Least-squares fit of the db_sum model to sparse samples.
//
// For one transmitter the system [1, -10*log10 d] is solved by QR. With
// several transmitters the per-transmitter intercept columns are mutually
// collinear (all ones), so the fit switches to a tiny ridge (lambda = 1e-8)
// that returns the minimum-norm solution: the common intercept spreads
// evenly across transmitters.
//
// Throws ErrorKind::underdetermined when even the merged design
// [1, -10*log10 d_1, ..., -10*log10 d_n] is rank deficient, e.g. fewer than
// n_tx + 1 samples, or all samples equidistant from a transmitter.
LdplFit fit_ldpl(const SparseSamples& samples, const TransmitterSet& tx,
                 int height, int width);

// Dense model evaluation over an H x W grid. Values are whatever units the
// params are in; no clamping is applied.
Grid upsample_template(const LdplParams& params, const TransmitterSet& tx,
                       int height, int width,
                       TxAggregate agg = TxAggregate::db_sum);

// Params as CSV with header "k,alpha,theta", one row per transmitter.
void write_params_csv(const LdplParams& params,
                      const std::filesystem::path& path);
LdplParams read_params_csv(const std::filesystem::path& path);

}  // namespace rmap
