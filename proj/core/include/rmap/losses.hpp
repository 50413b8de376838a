// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "rmap/grid.hpp"
#include "rmap/sampling.hpp"

namespace rmap {

// A loss evaluation: scalar value plus its gradient with respect to the
// estimate grid. An empty grad means identically zero.
struct LossTerm {
  double value = 0.0;
  Grid grad;
};

// value = ||y - yhat||_F^2 / (H*W), grad = 2*(yhat - y)/(H*W).
LossTerm l_mse(const Grid& estimate, const Grid& target);

// Unnormalized total variation: sum over right and down neighbor pairs of
// the squared difference (each pair counted once).
LossTerm l_tv(const Grid& estimate);

// Forward differences toward the [up, down, right, left] neighbors;
// out-of-bounds components are 0.
std::array<double, 4> grad4(const Grid& map, Coord cell);

// Mean over cells of (1 - CS) between the 4-direction gradients of the
// estimate and of the template z, CS = cosine similarity with denominator
// ||a||*||b|| + 1e-8; pairs of zero vectors count as CS = 1. Zero when the
// estimate equals the template. With literal_sum = true the raw
// unnormalized sum of CS values is returned instead (maximal at alignment,
// so as a minimization target it drives anti-alignment; kept for
// comparison runs only).
LossTerm l_gradient(const Grid& estimate, const Grid& z,
                    bool literal_sum = false);

// MSE over the downsampled observation coordinates only; the gradient is
// supported exactly on those cells.
LossTerm l_geo(const Grid& estimate, const SparseSamples& downsampled);

// MSE over real and imaginary parts of the n_f highest-frequency DFT
// coefficients (bin set from high_freq_indices, identical for both maps).
LossTerm l_hpf(const Grid& estimate, const Grid& target, int n_f);
// Variant against a precomputed target selection (avoids re-transforming a
// constant target every step).
LossTerm l_hpf(const Grid& estimate, const FreqSelection& target_sel);

// Weights of the combined objective, positionally:
//   lambda1 adversarial, lambda2 MSE, lambda3 TV, lambda4 gradient-align,
//   lambda5 MS-SSIM, lambda6 geometric, lambda7 high-frequency.
struct LossWeights {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double lambda4 = 0.0;
  double lambda5 = 0.0;
  double lambda6 = 0.0;
  double lambda7 = 0.0;
};

// Stock presets: phase 1 (1, 10, 0.01, 1, 0, 0, 0); phase 2
// (10, 1, 0.001, 0, 1e-4, 1e-4, 1e-4).
LossWeights phase1_default_weights();
LossWeights phase2_default_weights();

void validate_weights(const LossWeights& w);

// One evaluated component per objective term; leave a term default (empty
// grad, value 0) when its weight is zero.
struct LossComponents {
  LossTerm adv;
  LossTerm mse;
  LossTerm tv;
  LossTerm gradient;
  LossTerm ssim;
  LossTerm geo;
  LossTerm hpf;
};

// Phase 1: l1*adv + l2*mse + l3*tv + l4*gradient.
// Phase 2: l1*adv + l2*mse + l3*tv + l5*ssim + l6*geo + l7*hpf.
// Values and gradients combine linearly; active non-empty grads must agree
// in shape.
LossTerm combine_loss(int phase, const LossWeights& weights,
                      const LossComponents& components);

// Validation-driven phase switch.
struct PhaseConfig {
  double tau = 0.01;          // relative-improvement threshold
  int patience = 5;           // window length, in validation checks
  int max_phase1_epochs = 0;  // fallback; 0 = unresolved (trainer sets it)
};

struct PhaseState {
  int phase = 1;
  int epoch = 0;  // completed validation checks
  PhaseConfig config;
  std::vector<double> validation_history;
};

// Appends the new validation NMSE and advances the epoch counter. While in
// phase 1, switches to phase 2 when the best NMSE improved by less than
// tau (relative) over the last `patience` checks, or when the epoch reaches
// max_phase1_epochs (> 0). Transitions are irreversible.
PhaseState phase_step(const PhaseState& state, double new_val_nmse);

}  // namespace rmap
