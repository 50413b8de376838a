// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rmap/interp.hpp"
#include "rmap/metrics.hpp"
#include "rmap/scene.hpp"
#include "rmap/trainer.hpp"

namespace rmap {

enum class SamplingSetup { uniform, unbalanced, split };
enum class EstimatorKind { mbi, idw, rbf, kriging, rme_gan };

struct SamplingConfig {
  SamplingSetup setup = SamplingSetup::uniform;
  double ratio = 0.05;      // uniform regime
  double ratio_lo = 0.01;   // unbalanced regime bounds
  double ratio_hi = 0.10;
  double ratio_a = 0.10;    // split regime, per side
  double ratio_b = 0.01;
};

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::rbf;
  double idw_power = 2.0;
  RbfKernel rbf_kernel = RbfKernel::multiquadric;
  double rbf_eps = 0.5;
  double rbf_ridge = 0.0;
  int kriging_bins = 12;
  // Checkpoint path for the neural estimator; empty means the checkpoint
  // written by the train stage of the same run.
  std::string checkpoint;
};

struct EvalConfig {
  double outage_lo = kOutageThresholdLo;
  double outage_hi = kOutageThresholdHi;
};

// Everything a run needs. Every field has a working default, so an empty
// config file is a valid experiment.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  int jobs = 1;
  SceneConfig scene;
  int regions = 8;
  SplitSpec split;
  SamplingConfig sampling;
  EstimatorConfig estimator;
  TrainConfig train;  // seed and checkpoint_dir are filled in per run
  EvalConfig eval;
};

// Line-oriented `section.key = value` text. Blank lines and lines starting
// with '#' are skipped; unknown keys and malformed values are
// ErrorKind::config with the 1-based line number. `meta.version` is
// accepted and ignored so a run.meta file parses as a config.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical form: every key in a fixed order, doubles in shortest
// round-trip form. parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& cfg);

// serialize_config prefixed with the tool version, for run.meta files.
std::string run_meta_text(const ExperimentConfig& cfg);

const char* to_string(SamplingSetup setup);
const char* to_string(EstimatorKind kind);
const char* to_string(RbfKernel kernel);
const char* to_string(Conditioning conditioning);

}  // namespace rmap
