// SPDX-License-Identifier: Apache-2.0
#include "rmap/losses.hpp"

#include <algorithm>
#include <cmath>

#include "rmap/dft.hpp"
#include "rmap/error.hpp"

namespace rmap {

namespace {

constexpr double kCosineEps = 1e-8;

void check_same_shape(const Grid& a, const Grid& b, const char* what) {
  validate_grid(a, what);
  validate_grid(b, what);
  if (!a.same_shape(b)) {
    fail(ErrorKind::validation,
         std::string(what) + ": shape mismatch " + std::to_string(a.height) +
             "x" + std::to_string(a.width) + " vs " + std::to_string(b.height) +
             "x" + std::to_string(b.width));
  }
}

}  // namespace

LossTerm l_mse(const Grid& estimate, const Grid& target) {
  check_same_shape(estimate, target, "l_mse");
  const double inv_n = 1.0 / static_cast<double>(estimate.size());
  LossTerm out;
  out.grad = Grid::zeros(estimate.height, estimate.width);
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate.values[i] - target.values[i];
    out.value += d * d * inv_n;
    out.grad.values[i] = 2.0 * d * inv_n;
  }
  return out;
}

LossTerm l_tv(const Grid& estimate) {
  validate_grid(estimate, "l_tv");
  LossTerm out;
  out.grad = Grid::zeros(estimate.height, estimate.width);
  for (int r = 0; r < estimate.height; ++r) {
    for (int c = 0; c < estimate.width; ++c) {
      const double v = estimate.at(r, c);
      if (c + 1 < estimate.width) {
        const double d = v - estimate.at(r, c + 1);
        out.value += d * d;
        out.grad.at(r, c) += 2.0 * d;
        out.grad.at(r, c + 1) -= 2.0 * d;
      }
      if (r + 1 < estimate.height) {
        const double d = v - estimate.at(r + 1, c);
        out.value += d * d;
        out.grad.at(r, c) += 2.0 * d;
        out.grad.at(r + 1, c) -= 2.0 * d;
      }
    }
  }
  return out;
}

std::array<double, 4> grad4(const Grid& map, Coord cell) {
  if (!map.in_bounds(cell)) {
    fail(ErrorKind::validation, "grad4: cell outside grid");
  }
  const int r = cell.row;
  const int c = cell.col;
  const double v = map.at(r, c);
  std::array<double, 4> g{0.0, 0.0, 0.0, 0.0};
  if (r > 0) g[0] = map.at(r - 1, c) - v;                // up
  if (r + 1 < map.height) g[1] = map.at(r + 1, c) - v;   // down
  if (c + 1 < map.width) g[2] = map.at(r, c + 1) - v;    // right
  if (c > 0) g[3] = map.at(r, c - 1) - v;                // left
  return g;
}

LossTerm l_gradient(const Grid& estimate, const Grid& z, bool literal_sum) {
  check_same_shape(estimate, z, "l_gradient");
  const int h = estimate.height;
  const int w = estimate.width;
  LossTerm out;
  out.grad = Grid::zeros(h, w);

  // Neighbor offsets in grad4 component order: up, down, right, left.
  constexpr int kDr[4] = {-1, 1, 0, 0};
  constexpr int kDc[4] = {0, 0, 1, -1};

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::array<double, 4> a = grad4(estimate, {r, c});
      const std::array<double, 4> b = grad4(z, {r, c});
      double dot = 0.0, na2 = 0.0, nb2 = 0.0;
      for (int k = 0; k < 4; ++k) {
        dot += a[k] * b[k];
        na2 += a[k] * a[k];
        nb2 += b[k] * b[k];
      }
      const double na = std::sqrt(na2);
      const double nb = std::sqrt(nb2);

      double cs;
      std::array<double, 4> dcs_da{0.0, 0.0, 0.0, 0.0};
      if (na == 0.0 && nb == 0.0) {
        cs = 1.0;  // aligned by convention; flat in both maps
      } else {
        const double denom = na * nb + kCosineEps;
        cs = dot / denom;
        // d(cs)/da = b/denom - dot*nb*(a/na)/denom^2; a/na := 0 at na = 0.
        for (int k = 0; k < 4; ++k) {
          double term = b[k] / denom;
          if (na > 0.0) {
            term -= dot * nb * (a[k] / na) / (denom * denom);
          }
          dcs_da[k] = term;
        }
      }

      double dloss_dcs;
      if (literal_sum) {
        out.value += cs;
        dloss_dcs = 1.0;
      } else {
        out.value += 1.0 - cs;
        dloss_dcs = -1.0;
      }

      // a_k = estimate(neighbor) - estimate(cell) for in-bounds neighbors.
      for (int k = 0; k < 4; ++k) {
        const int nr = r + kDr[k];
        const int nc = c + kDc[k];
        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
        const double g = dloss_dcs * dcs_da[k];
        out.grad.at(nr, nc) += g;
        out.grad.at(r, c) -= g;
      }
    }
  }
  if (!literal_sum) {
    const double inv_n = 1.0 / static_cast<double>(estimate.size());
    out.value *= inv_n;
    for (double& v : out.grad.values) v *= inv_n;
  }
  return out;
}

LossTerm l_geo(const Grid& estimate, const SparseSamples& downsampled) {
  validate_grid(estimate, "l_geo estimate");
  validate_samples(downsampled, estimate.height, estimate.width);
  if (downsampled.count() == 0) {
    fail(ErrorKind::validation, "l_geo: empty downsampled sample set");
  }
  const double inv_n = 1.0 / static_cast<double>(downsampled.count());
  LossTerm out;
  out.grad = Grid::zeros(estimate.height, estimate.width);
  for (int i = 0; i < downsampled.count(); ++i) {
    const Coord p = downsampled.coords[i];
    const double d = estimate.at(p.row, p.col) - downsampled.psd[i];
    out.value += d * d * inv_n;
    out.grad.at(p.row, p.col) += 2.0 * d * inv_n;
  }
  return out;
}

LossTerm l_hpf(const Grid& estimate, const FreqSelection& target_sel) {
  validate_grid(estimate, "l_hpf estimate");
  if (estimate.height != target_sel.height ||
      estimate.width != target_sel.width) {
    fail(ErrorKind::validation, "l_hpf: selection shape mismatch");
  }
  if (target_sel.bins.empty() ||
      target_sel.bins.size() != target_sel.coeffs.size()) {
    fail(ErrorKind::validation, "l_hpf: malformed frequency selection");
  }
  const std::size_t n_f = target_sel.bins.size();
  const auto spectrum = dft2(estimate);

  std::vector<std::complex<double>> diff(n_f);
  LossTerm out;
  const double inv = 1.0 / (2.0 * static_cast<double>(n_f));
  for (std::size_t k = 0; k < n_f; ++k) {
    const FreqBin b = target_sel.bins[k];
    const std::complex<double> d =
        spectrum[static_cast<std::size_t>(b.u) * estimate.width + b.v] -
        target_sel.coeffs[k];
    diff[k] = d;
    out.value += (d.real() * d.real() + d.imag() * d.imag()) * inv;
  }
  out.grad = dft2_adjoint(target_sel.bins, diff, estimate.height,
                          estimate.width);
  for (double& v : out.grad.values) v *= 2.0 * inv;
  return out;
}

LossTerm l_hpf(const Grid& estimate, const Grid& target, int n_f) {
  check_same_shape(estimate, target, "l_hpf");
  return l_hpf(estimate, high_freq_select(target, n_f));
}

LossWeights phase1_default_weights() {
  LossWeights w;
  w.lambda1 = 1.0;
  w.lambda2 = 10.0;
  w.lambda3 = 0.01;
  w.lambda4 = 1.0;
  return w;
}

LossWeights phase2_default_weights() {
  LossWeights w;
  w.lambda1 = 10.0;
  w.lambda2 = 1.0;
  w.lambda3 = 0.001;
  w.lambda5 = 1e-4;
  w.lambda6 = 1e-4;
  w.lambda7 = 1e-4;
  return w;
}

void validate_weights(const LossWeights& w) {
  const double all[7] = {w.lambda1, w.lambda2, w.lambda3, w.lambda4,
                         w.lambda5, w.lambda6, w.lambda7};
  for (int i = 0; i < 7; ++i) {
    if (!std::isfinite(all[i]) || all[i] < 0.0) {
      fail(ErrorKind::validation,
           "loss weight lambda" + std::to_string(i + 1) +
               " must be finite and non-negative");
    }
  }
}

LossTerm combine_loss(int phase, const LossWeights& weights,
                      const LossComponents& components) {
  validate_weights(weights);
  if (phase != 1 && phase != 2) {
    fail(ErrorKind::parameter,
         "phase must be 1 or 2, got " + std::to_string(phase));
  }
  std::vector<std::pair<double, const LossTerm*>> active;
  active.emplace_back(weights.lambda1, &components.adv);
  active.emplace_back(weights.lambda2, &components.mse);
  active.emplace_back(weights.lambda3, &components.tv);
  if (phase == 1) {
    active.emplace_back(weights.lambda4, &components.gradient);
  } else {
    active.emplace_back(weights.lambda5, &components.ssim);
    active.emplace_back(weights.lambda6, &components.geo);
    active.emplace_back(weights.lambda7, &components.hpf);
  }

  LossTerm out;
  for (const auto& [w, term] : active) {
    if (w == 0.0) continue;
    out.value += w * term->value;
    if (term->grad.values.empty()) continue;
    if (out.grad.values.empty()) {
      out.grad = Grid::zeros(term->grad.height, term->grad.width);
    } else if (!out.grad.same_shape(term->grad)) {
      fail(ErrorKind::validation, "combine_loss: component grads disagree in shape");
    }
    for (std::size_t i = 0; i < out.grad.size(); ++i) {
      out.grad.values[i] += w * term->grad.values[i];
    }
  }
  return out;
}

PhaseState phase_step(const PhaseState& state, double new_val_nmse) {
  if (!std::isfinite(new_val_nmse) || new_val_nmse < 0.0) {
    fail(ErrorKind::validation,
         "phase_step: validation NMSE must be finite and non-negative");
  }
  if (state.phase != 1 && state.phase != 2) {
    fail(ErrorKind::validation, "phase_step: invalid phase");
  }
  if (!(state.config.tau > 0.0) || state.config.patience < 1 ||
      state.config.max_phase1_epochs < 0) {
    fail(ErrorKind::validation, "phase_step: invalid phase config");
  }

  PhaseState next = state;
  next.validation_history.push_back(new_val_nmse);
  next.epoch = state.epoch + 1;
  if (next.phase == 2) return next;

  const auto& hist = next.validation_history;
  const int n = static_cast<int>(hist.size());
  const int patience = state.config.patience;

  bool plateau = false;
  if (n >= patience) {
    // Prefix minima: best[i] over hist[0..i]. The window improvement is the
    // drop of the running best across the last `patience` checks.
    double best_before = hist[0];
    for (int i = 1; i <= n - patience; ++i) {
      best_before = std::min(best_before, hist[i]);
    }
    double best_now = best_before;
    for (int i = std::max(1, n - patience + 1); i < n; ++i) {
      best_now = std::min(best_now, hist[i]);
    }
    const double improvement = best_before - best_now;
    plateau = improvement < state.config.tau * best_before;
  }
  const bool fallback = state.config.max_phase1_epochs > 0 &&
                        next.epoch >= state.config.max_phase1_epochs;
  if (plateau || fallback) {
    next.phase = 2;
  }
  return next;
}

}  // namespace rmap
