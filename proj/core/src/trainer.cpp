// SPDX-License-Identifier: Apache-2.0
#include "rmap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "rmap/error.hpp"
#include "rmap/ldpl.hpp"
#include "rmap/metrics.hpp"
#include "rmap/msssim.hpp"

namespace rmap {
namespace {

// Stream ids for the independent deterministic rng streams.
constexpr std::uint64_t kInitGeneratorStream = 1;
constexpr std::uint64_t kInitDiscriminatorStream = 2;
constexpr std::uint64_t kShuffleStreamBase = 0x100;

// Keeps scores away from exact 0/1 so the log terms stay finite.
double clamp_prob(double p) {
  return std::clamp(p, 1e-12, 1.0 - 1e-12);
}

}  // namespace

RegionAux make_region_aux(const RegionFeatures& region, int geo_segments,
                          int hpf_bins) {
  if (!region.ground_truth.has_value()) {
    fail(ErrorKind::validation, "training region lacks ground truth");
  }
  if (region.samples.count() == 0) {
    fail(ErrorKind::validation, "training region has no observations");
  }
  RegionAux aux;

  // Observations are normalized psd, and the propagation model is affine in
  // its parameters, so fitting directly in normalized units is exact.
  try {
    const LdplFit fit =
        fit_ldpl(region.samples, region.transmitters, region.height,
                 region.width);
    aux.z = upsample_template(fit.params, region.transmitters, region.height,
                              region.width);
    for (double& v : aux.z.values) {
      v = std::clamp(v, 0.0, 1.0);
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::underdetermined) throw;
    double mean = 0.0;
    for (const double v : region.samples.psd) mean += v;
    mean /= static_cast<double>(region.samples.count());
    aux.z = Grid::constant(region.height, region.width, mean);
  }

  const EncodedInput enc = encode_input(region);
  const SuperpixelLabels labels = superpixels(enc.observations, geo_segments);
  aux.down = geometric_downsample(region.samples, labels);
  aux.hpf = high_freq_select(*region.ground_truth, hpf_bins);
  return aux;
}

Trainer::Trainer(const Dataset& dataset, const TrainConfig& cfg)
    : ds_(dataset),
      cfg_(cfg),
      gen_(cfg.generator),
      disc_(cfg.discriminator),
      g_opt_(cfg.adam, gen_.params()),
      d_opt_(cfg.adam, disc_.params()) {
  if (cfg.epochs <= 0 || cfg.batch_size <= 0) {
    fail(ErrorKind::parameter, "epochs and batch_size must be positive");
  }
  if (cfg.ssim_levels < 1) {
    fail(ErrorKind::parameter, "ssim_levels must be positive");
  }
  if (ds_.regions.empty()) {
    fail(ErrorKind::validation, "training dataset has no regions");
  }
  validate_weights(cfg.phase1);
  validate_weights(cfg.phase2);
  if (cfg.generator.in_channels != (cfg.input_mask ? 4 : 3)) {
    fail(ErrorKind::parameter,
         "generator in_channels must be 3, or 4 with input_mask");
  }

  phase_.config = cfg.phase;
  if (phase_.config.max_phase1_epochs <= 0) {
    phase_.config.max_phase1_epochs = std::max(1, cfg.epochs / 2);
  }

  encoded_.reserve(ds_.regions.size());
  aux_.reserve(ds_.regions.size());
  for (const RegionFeatures& region : ds_.regions) {
    if (region.height != ds_.height || region.width != ds_.width) {
      fail(ErrorKind::validation, "dataset regions differ in shape");
    }
    encoded_.push_back(encode_input(region, cfg.input_mask));
    aux_.push_back(make_region_aux(region, cfg.geo_segments, cfg.hpf_bins));
  }

  Rng init_g = Rng::child(cfg.seed, kInitGeneratorStream);
  gen_.init(init_g);
  Rng init_d = Rng::child(cfg.seed, kInitDiscriminatorStream);
  disc_.init(init_d);
}

Tensor4 Trainer::encode_batch(const std::vector<int>& region_indices) const {
  std::vector<EncodedInput> batch;
  batch.reserve(region_indices.size());
  for (const int i : region_indices) {
    if (i < 0 || i >= static_cast<int>(encoded_.size())) {
      fail(ErrorKind::validation, "region index out of range");
    }
    batch.push_back(encoded_[i]);
  }
  return batch_from_inputs(batch);
}

Tensor4 Trainer::target_batch(const std::vector<int>& region_indices) const {
  std::vector<const Grid*> grids;
  grids.reserve(region_indices.size());
  for (const int i : region_indices) {
    grids.push_back(&*ds_.regions[i].ground_truth);
  }
  return batch_from_grids(grids);
}

Tensor4 Trainer::condition_planes(const std::vector<int>& region_indices,
                                  bool real) const {
  const int n = static_cast<int>(region_indices.size());
  Tensor4 cond(n, 2, ds_.height, ds_.width);
  const std::size_t plane =
      static_cast<std::size_t>(ds_.height) * ds_.width;
  for (int b = 0; b < n; ++b) {
    if (cfg_.conditioning == Conditioning::features) {
      const EncodedInput& e = encoded_[region_indices[b]];
      std::copy(e.urban.values.begin(), e.urban.values.end(),
                cond.plane(b, 0));
      std::copy(e.transmitters.values.begin(), e.transmitters.values.end(),
                cond.plane(b, 1));
    } else {
      double* p0 = cond.plane(b, 0);
      double* p1 = cond.plane(b, 1);
      std::fill(p0, p0 + plane, real ? 1.0 : 0.0);
      std::fill(p1, p1 + plane, real ? 0.0 : 1.0);
    }
  }
  return cond;
}

const LossWeights& Trainer::active_weights() const {
  return phase_.phase == 1 ? cfg_.phase1 : cfg_.phase2;
}

void Trainer::check_finite(double value, const char* what, int step) const {
  if (!std::isfinite(value)) {
    fail(ErrorKind::numerical, std::string("non-finite ") + what +
                                   " at epoch " + std::to_string(epoch_) +
                                   " step " + std::to_string(step));
  }
}

double Trainer::step_discriminator(const std::vector<int>& region_indices) {
  if (region_indices.empty()) {
    fail(ErrorKind::validation, "empty batch");
  }
  const Tensor4 x = encode_batch(region_indices);
  const Tensor4 fake_map = gen_.forward(x);
  const Tensor4 real_map = target_batch(region_indices);
  const Tensor4 real_in =
      concat_channels(real_map, condition_planes(region_indices, true));
  const Tensor4 fake_in =
      concat_channels(fake_map, condition_planes(region_indices, false));

  NetTape real_tape;
  NetTape fake_tape;
  const std::vector<double> pr =
      flatten_scores(disc_.forward(real_in, &real_tape));
  const std::vector<double> pf =
      flatten_scores(disc_.forward(fake_in, &fake_tape));

  const int n = static_cast<int>(region_indices.size());
  const double inv = 1.0 / n;
  Tensor4 d_real(n, 1, 1, 1);
  Tensor4 d_fake(n, 1, 1, 1);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = clamp_prob(pr[i]);
    const double f = clamp_prob(pf[i]);
    loss -= inv * (std::log(r) + std::log(1.0 - f));
    d_real.v[i] = -inv / r;
    d_fake.v[i] = inv / (1.0 - f);
  }
  check_finite(loss, "discriminator loss", 0);

  disc_.backward(real_tape, d_real);
  disc_.backward(fake_tape, d_fake);
  d_opt_.step();
  d_opt_.zero_grad();
  return loss;
}

double Trainer::step_generator(const std::vector<int>& region_indices) {
  if (region_indices.empty()) {
    fail(ErrorKind::validation, "empty batch");
  }
  const Tensor4 x = encode_batch(region_indices);
  NetTape gen_tape;
  const Tensor4 estimate = gen_.forward(x, &gen_tape);
  ensure_finite(estimate, "generator output");

  const int n = static_cast<int>(region_indices.size());
  const double inv = 1.0 / n;
  const LossWeights& w = active_weights();
  const int phase = phase_.phase;
  Tensor4 d_estimate(n, 1, estimate.h, estimate.w);
  double total = 0.0;

  if (w.lambda1 != 0.0) {
    const Tensor4 fake_in =
        concat_channels(estimate, condition_planes(region_indices, false));
    NetTape fake_tape;
    const std::vector<double> pf =
        flatten_scores(disc_.forward(fake_in, &fake_tape));
    Tensor4 d_prob(n, 1, 1, 1);
    for (int i = 0; i < n; ++i) {
      const double p = clamp_prob(pf[i]);
      if (cfg_.nonsaturating) {
        total += w.lambda1 * inv * -std::log(p);
        d_prob.v[i] = w.lambda1 * -inv / p;
      } else {
        total += w.lambda1 * inv * std::log(1.0 - p);
        d_prob.v[i] = w.lambda1 * -inv / (1.0 - p);
      }
    }
    const Tensor4 d_fake_in = disc_.backward(fake_tape, d_prob);
    disc_.zero_grad();  // frozen in the generator step
    const std::size_t plane =
        static_cast<std::size_t>(estimate.h) * estimate.w;
    for (int i = 0; i < n; ++i) {
      const double* src = d_fake_in.plane(i, 0);
      double* dst = d_estimate.plane(i, 0);
      for (std::size_t k = 0; k < plane; ++k) {
        dst[k] += src[k];
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const int region = region_indices[i];
    const Grid estimate_i = plane_to_grid(estimate, i, 0);
    const Grid& truth = *ds_.regions[region].ground_truth;
    const RegionAux& aux = aux_[region];

    LossComponents comps;
    if (w.lambda2 != 0.0) comps.mse = l_mse(estimate_i, truth);
    if (w.lambda3 != 0.0) comps.tv = l_tv(estimate_i);
    if (phase == 1) {
      if (w.lambda4 != 0.0) comps.gradient = l_gradient(estimate_i, aux.z);
    } else {
      if (w.lambda5 != 0.0) {
        comps.ssim = l_ssim(estimate_i, truth, cfg_.ssim_levels);
      }
      if (w.lambda6 != 0.0) comps.geo = l_geo(estimate_i, aux.down);
      if (w.lambda7 != 0.0) comps.hpf = l_hpf(estimate_i, aux.hpf);
    }
    const LossTerm combined = combine_loss(phase, w, comps);
    total += combined.value * inv;
    if (!combined.grad.values.empty()) {
      double* dst = d_estimate.plane(i, 0);
      for (std::size_t k = 0; k < combined.grad.values.size(); ++k) {
        dst[k] += combined.grad.values[k] * inv;
      }
    }
  }
  check_finite(total, "generator loss", 0);

  gen_.backward(gen_tape, d_estimate);
  g_opt_.step();
  g_opt_.zero_grad();
  return total;
}

double Trainer::validation_nmse() {
  if (ds_.split.validation.empty()) {
    fail(ErrorKind::validation, "dataset has no validation split");
  }
  double sum = 0.0;
  int count = 0;
  std::vector<int> chunk;
  for (std::size_t start = 0; start < ds_.split.validation.size();
       start += static_cast<std::size_t>(cfg_.batch_size)) {
    chunk.assign(
        ds_.split.validation.begin() + static_cast<std::ptrdiff_t>(start),
        ds_.split.validation.begin() +
            static_cast<std::ptrdiff_t>(
                std::min(start + cfg_.batch_size,
                         ds_.split.validation.size())));
    const Tensor4 x = encode_batch(chunk);
    const Tensor4 yh = gen_.forward(x);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const Grid estimate = plane_to_grid(yh, static_cast<int>(i), 0);
      sum += nmse(*ds_.regions[chunk[i]].ground_truth, estimate);
      ++count;
    }
  }
  return sum / count;
}

TrainResult Trainer::run() {
  if (ds_.split.train.empty()) {
    fail(ErrorKind::validation, "dataset has no train split");
  }
  TrainHistory history;
  history.epochs.reserve(static_cast<std::size_t>(cfg_.epochs));

  std::vector<int> order = ds_.split.train;
  for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    epoch_ = epoch;
    const int phase_in_force = phase_.phase;

    Rng shuffle = Rng::child(cfg_.seed, kShuffleStreamBase +
                                            static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::uint64_t j = shuffle.next_below(i);
      std::swap(order[i - 1], order[j]);
    }

    double d_sum = 0.0;
    double g_sum = 0.0;
    int steps = 0;
    std::vector<int> batch;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg_.batch_size)) {
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(std::min(
                                       start + cfg_.batch_size, order.size())));
      d_sum += step_discriminator(batch);
      g_sum += step_generator(batch);
      ++steps;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.phase = phase_in_force;
    stats.d_loss = d_sum / steps;
    stats.g_loss = g_sum / steps;
    stats.val_nmse = validation_nmse();
    history.epochs.push_back(stats);

    phase_ = phase_step(phase_, stats.val_nmse);

    if (!cfg_.checkpoint_dir.empty()) {
      const Checkpoint ck =
          snapshot_state(gen_, disc_, &g_opt_, &d_opt_, phase_);
      save_checkpoint((cfg_.checkpoint_dir / "last.ckpt").string(), ck);
    }
  }
  epoch_ = 0;

  for (const EpochStats& s : history.epochs) {
    if (s.phase == 2) {
      history.phase2_onset = s.epoch;
      break;
    }
  }
  history.phase = phase_;

  if (!cfg_.checkpoint_dir.empty()) {
    const Checkpoint ck = snapshot_state(gen_, disc_, &g_opt_, &d_opt_, phase_);
    save_checkpoint((cfg_.checkpoint_dir / "final.ckpt").string(), ck);
  }

  return TrainResult{std::move(gen_), std::move(disc_), std::move(history)};
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg) {
  Trainer trainer(dataset, cfg);
  return trainer.run();
}

}  // namespace rmap
