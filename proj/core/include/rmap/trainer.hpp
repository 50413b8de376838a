// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rmap/checkpoint.hpp"
#include "rmap/losses.hpp"
#include "rmap/model.hpp"
#include "rmap/sampling.hpp"
#include "rmap/scene.hpp"

namespace rmap {

// What the discriminator sees next to the map under judgment:
//   features       the region's building mask and transmitter plane
//   literal_onehot two constant planes encoding real (1,0) vs fake (0,1);
//                  this hands the discriminator the answer and exists only
//                  for comparison runs
enum class Conditioning { features, literal_onehot };

struct TrainConfig {
  int epochs = 60;
  int batch_size = 4;
  AdamConfig adam;  // shared by both optimizers
  std::uint64_t seed = 0;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  LossWeights phase1 = phase1_default_weights();
  LossWeights phase2 = phase2_default_weights();
  PhaseConfig phase;  // max_phase1_epochs 0 resolves to epochs / 2
  Conditioning conditioning = Conditioning::features;
  bool nonsaturating = false;  // replace log(1-D) with -log D for the
                               // generator's adversarial term
  bool input_mask = false;     // adds the sample mask as a 4th input channel
  int hpf_bins = 32;           // high-frequency coefficients per region
  int geo_segments = 24;       // superpixel count for the geometric term
  int ssim_levels = 3;
  std::filesystem::path checkpoint_dir;  // empty disables checkpoint files
};

struct EpochStats {
  int epoch = 0;  // 1-based
  int phase = 1;  // phase in force while the epoch trained
  double d_loss = 0.0;
  double g_loss = 0.0;
  double val_nmse = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int phase2_onset = 0;  // first epoch trained in phase 2; 0 = none
  PhaseState phase;      // final controller state
};

struct TrainResult {
  Generator generator;
  Discriminator discriminator;
  TrainHistory history;
};

// Per-region constants for the loss terms: the fitted propagation template
// (clamped to the normalized range; falls back to the mean observation when
// the fit is underdetermined), the peak observation per superpixel of the
// observation channel, and the target's high-frequency coefficients.
struct RegionAux {
  Grid z;
  SparseSamples down;
  FreqSelection hpf;
};

RegionAux make_region_aux(const RegionFeatures& region, int geo_segments,
                          int hpf_bins);

// Alternating one-discriminator-step / one-generator-step adversarial
// training with the two-phase objective. Single-threaded and deterministic:
// a fixed seed reproduces the loss history bit for bit.
class Trainer {
 public:
  Trainer(const Dataset& dataset, const TrainConfig& cfg);

  // Full schedule over the dataset's train split, validating on the
  // validation split each epoch. Moves the models into the result, so the
  // trainer is spent afterwards.
  TrainResult run();

  // Single optimizer steps on explicit region indices (into the dataset's
  // region list), exposed so tests can pin batch composition.
  double step_discriminator(const std::vector<int>& region_indices);
  double step_generator(const std::vector<int>& region_indices);

  // Mean NMSE of the current generator over the validation split.
  double validation_nmse();

  int current_phase() const { return phase_.phase; }
  Generator& generator() { return gen_; }
  Discriminator& discriminator() { return disc_; }

 private:
  Tensor4 encode_batch(const std::vector<int>& region_indices) const;
  Tensor4 target_batch(const std::vector<int>& region_indices) const;
  Tensor4 condition_planes(const std::vector<int>& region_indices,
                           bool real) const;
  const LossWeights& active_weights() const;
  void check_finite(double value, const char* what, int step) const;

  const Dataset& ds_;
  TrainConfig cfg_;
  Generator gen_;
  Discriminator disc_;
  Adam g_opt_;
  Adam d_opt_;
  PhaseState phase_;
  std::vector<EncodedInput> encoded_;  // one per dataset region
  std::vector<RegionAux> aux_;
  int epoch_ = 0;  // 1-based while an epoch is running, for diagnostics
};

TrainResult train(const Dataset& dataset, const TrainConfig& cfg);

}  // namespace rmap
