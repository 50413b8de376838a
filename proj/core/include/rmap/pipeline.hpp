// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "rmap/config.hpp"
#include "rmap/metrics.hpp"
#include "rmap/trainer.hpp"

namespace rmap {

// Stage directories under cfg.out. Every stage writes a run.meta echoing
// the resolved config and the tool version into its own directory.
std::filesystem::path dataset_dir(const ExperimentConfig& cfg);
std::filesystem::path estimates_dir(const ExperimentConfig& cfg);
std::filesystem::path train_dir(const ExperimentConfig& cfg);
std::filesystem::path eval_dir(const ExperimentConfig& cfg);

// Model-based estimate: propagation parameters fit to the region's samples,
// evaluated densely and clamped to the normalized range. An underdetermined
// fit degrades to the constant mean observation.
Grid mbi_estimate(const RegionFeatures& region);

// Dispatches on cfg.estimator.kind. For rme_gan, `checkpoint` must point at
// a readable checkpoint file.
Grid estimate_region(const ExperimentConfig& cfg, const RegionFeatures& region);

// Generates the dataset directory: regions, ground truth, split, metadata.
std::filesystem::path cmd_gen(const ExperimentConfig& cfg);

// Draws the configured sampling setup for every region, writing
// region_NNNN_samples.csv files into the dataset directory.
void cmd_sample(const ExperimentConfig& cfg);

// Writes estimate_NNNN.rmg (plus .pgm previews) for every sampled region.
void cmd_estimate(const ExperimentConfig& cfg);

// Trains on the dataset train split; writes last.ckpt, final.ckpt and
// history.csv (header epoch,phase,d_loss,g_loss,val_nmse).
TrainHistory cmd_train(const ExperimentConfig& cfg);

// Scores estimates against ground truth per split role; writes report.csv,
// histogram.csv and report.txt.
EvalReport cmd_eval(const ExperimentConfig& cfg);

// gen, sample, estimate (training first when the estimator needs it), eval.
void cmd_pipeline(const ExperimentConfig& cfg);

}  // namespace rmap
