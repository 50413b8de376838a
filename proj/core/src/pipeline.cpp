// SPDX-License-Identifier: Apache-2.0
#include "rmap/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rmap/checkpoint.hpp"
#include "rmap/error.hpp"
#include "rmap/grid_io.hpp"
#include "rmap/interp.hpp"
#include "rmap/ldpl.hpp"
#include "rmap/sampling.hpp"
#include "rmap/tensor.hpp"

namespace rmap {
namespace fs = std::filesystem;

namespace {

// Per-region sampling rng stream; disjoint from the scene generator's and
// the trainer's streams by construction.
constexpr std::uint64_t kSampleStreamBase = 0x5A000000;

std::string region_stem(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "region_%04d", idx);
  return buf;
}

std::string estimate_stem(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "estimate_%04d", idx);
  return buf;
}

void write_meta(const ExperimentConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_file_bytes(dir / "run.meta", run_meta_text(cfg));
}

Dataset load_dataset_checked(const ExperimentConfig& cfg) {
  const fs::path dir = dataset_dir(cfg);
  if (!fs::exists(dir / "meta.csv")) {
    fail(ErrorKind::load,
         "missing dataset at " + dir.string() + "; run gen first");
  }
  return load_dataset(dir);
}

void require_samples(const Dataset& ds, const ExperimentConfig& cfg) {
  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    if (ds.regions[i].samples.count() == 0) {
      const fs::path path = dataset_dir(cfg) /
                            (region_stem(static_cast<int>(i)) + "_samples.csv");
      fail(ErrorKind::load,
           "missing " + path.string() + "; run sample first");
    }
  }
}

// Runs fn(0..n-1) on up to `jobs` threads. fn must only touch its own index.
void parallel_for(int jobs, int n, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([t, workers, n, &fn] {
      for (int i = t; i < n; i += workers) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

Grid neural_estimate(const Generator& gen, const RegionFeatures& region) {
  const bool with_mask = gen.config().in_channels == 4;
  const Tensor4 x = batch_from_inputs({encode_input(region, with_mask)});
  const Tensor4 y = gen.forward(x);
  return plane_to_grid(y, 0, 0);
}

fs::path resolve_checkpoint(const ExperimentConfig& cfg) {
  const fs::path path = cfg.estimator.checkpoint.empty()
                            ? train_dir(cfg) / "final.ckpt"
                            : fs::path(cfg.estimator.checkpoint);
  if (!fs::exists(path)) {
    fail(ErrorKind::estimator,
         "missing checkpoint " + path.string() +
             "; run train first or set estimator.checkpoint");
  }
  return path;
}

}  // namespace

fs::path dataset_dir(const ExperimentConfig& cfg) {
  return cfg.out / "dataset";
}
fs::path estimates_dir(const ExperimentConfig& cfg) {
  return cfg.out / "estimates";
}
fs::path train_dir(const ExperimentConfig& cfg) { return cfg.out / "train"; }
fs::path eval_dir(const ExperimentConfig& cfg) { return cfg.out / "eval"; }

Grid mbi_estimate(const RegionFeatures& region) {
  if (region.samples.count() == 0) {
    fail(ErrorKind::estimator, "region has no observations");
  }
  try {
    const LdplFit fit = fit_ldpl(region.samples, region.transmitters,
                                 region.height, region.width);
    Grid z = upsample_template(fit.params, region.transmitters, region.height,
                               region.width);
    for (double& v : z.values) v = std::clamp(v, 0.0, 1.0);
    return z;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::underdetermined) throw;
    double mean = 0.0;
    for (const double v : region.samples.psd) mean += v;
    mean /= static_cast<double>(region.samples.count());
    return Grid::constant(region.height, region.width, mean);
  }
}

Grid estimate_region(const ExperimentConfig& cfg,
                     const RegionFeatures& region) {
  const EstimatorConfig& e = cfg.estimator;
  switch (e.kind) {
    case EstimatorKind::mbi:
      return mbi_estimate(region);
    case EstimatorKind::idw:
      return idw_interpolate(region.samples, region.height, region.width,
                             e.idw_power);
    case EstimatorKind::rbf:
      return rbf_interpolate(region.samples, region.height, region.width,
                             e.rbf_kernel, e.rbf_eps, e.rbf_ridge);
    case EstimatorKind::kriging:
      return kriging_interpolate(region.samples, region.height, region.width,
                                 e.kriging_bins);
    case EstimatorKind::rme_gan: {
      const Checkpoint ckpt =
          load_checkpoint(resolve_checkpoint(cfg).string());
      const Generator gen = generator_from_checkpoint(ckpt);
      return neural_estimate(gen, region);
    }
  }
  fail(ErrorKind::estimator, "unknown estimator kind");
}

fs::path cmd_gen(const ExperimentConfig& cfg) {
  const Dataset ds =
      build_dataset(cfg.scene, cfg.regions, cfg.seed, cfg.split, cfg.jobs);
  const fs::path dir = dataset_dir(cfg);
  fs::create_directories(dir);
  save_dataset(ds, dir);
  write_meta(cfg, dir);
  return dir;
}

void cmd_sample(const ExperimentConfig& cfg) {
  Dataset ds = load_dataset_checked(cfg);
  const fs::path dir = dataset_dir(cfg);
  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    RegionFeatures& region = ds.regions[i];
    if (!region.ground_truth.has_value()) {
      fail(ErrorKind::load, "missing " +
                                (dir / (region_stem(static_cast<int>(i)) +
                                        "_gt.rmg"))
                                    .string() +
                                "; sampling reads ground truth");
    }
    Rng rng = Rng::child(cfg.seed, kSampleStreamBase + i);
    const SamplingConfig& s = cfg.sampling;
    switch (s.setup) {
      case SamplingSetup::uniform:
        region.samples = sample_uniform(*region.ground_truth, s.ratio, rng);
        break;
      case SamplingSetup::unbalanced:
        region.samples = sample_unbalanced(*region.ground_truth, s.ratio_lo,
                                           s.ratio_hi, rng);
        break;
      case SamplingSetup::split:
        region.samples =
            sample_split(*region.ground_truth, s.ratio_a, s.ratio_b, rng);
        break;
    }
    write_samples_csv(region.samples,
                      dir / (region_stem(static_cast<int>(i)) +
                             "_samples.csv"));
  }
  write_meta(cfg, dir);
}

void cmd_estimate(const ExperimentConfig& cfg) {
  const Dataset ds = load_dataset_checked(cfg);
  require_samples(ds, cfg);
  const fs::path dir = estimates_dir(cfg);
  fs::create_directories(dir);

  const int n = static_cast<int>(ds.regions.size());
  std::vector<Grid> estimates(static_cast<std::size_t>(n));
  if (cfg.estimator.kind == EstimatorKind::rme_gan) {
    // One checkpoint load shared by every region.
    const Checkpoint ckpt = load_checkpoint(resolve_checkpoint(cfg).string());
    const Generator gen = generator_from_checkpoint(ckpt);
    parallel_for(cfg.jobs, n, [&](int i) {
      estimates[static_cast<std::size_t>(i)] =
          neural_estimate(gen, ds.regions[static_cast<std::size_t>(i)]);
    });
  } else {
    parallel_for(cfg.jobs, n, [&](int i) {
      estimates[static_cast<std::size_t>(i)] =
          estimate_region(cfg, ds.regions[static_cast<std::size_t>(i)]);
    });
  }

  for (int i = 0; i < n; ++i) {
    const Grid& est = estimates[static_cast<std::size_t>(i)];
    write_grid(est, dir / (estimate_stem(i) + ".rmg"), GridFormat::rmg);
    Grid preview = est;  // previews clamp; the .rmg keeps raw values
    for (double& v : preview.values) v = std::clamp(v, 0.0, 1.0);
    write_grid(preview, dir / (estimate_stem(i) + ".pgm"), GridFormat::pgm);
  }
  write_meta(cfg, dir);
}

TrainHistory cmd_train(const ExperimentConfig& cfg) {
  const Dataset ds = load_dataset_checked(cfg);
  require_samples(ds, cfg);
  const fs::path dir = train_dir(cfg);
  fs::create_directories(dir);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  tc.checkpoint_dir = dir;
  tc.generator.in_channels = tc.input_mask ? 4 : 3;

  TrainResult result = train(ds, tc);

  std::string csv = "epoch,phase,d_loss,g_loss,val_nmse\n";
  for (const EpochStats& s : result.history.epochs) {
    csv += std::to_string(s.epoch) + "," + std::to_string(s.phase) + "," +
           format_double(s.d_loss) + "," + format_double(s.g_loss) + "," +
           format_double(s.val_nmse) + "\n";
  }
  write_file_bytes(dir / "history.csv", csv);
  write_meta(cfg, dir);
  return std::move(result.history);
}

EvalReport cmd_eval(const ExperimentConfig& cfg) {
  const Dataset ds = load_dataset_checked(cfg);
  const fs::path est_dir = estimates_dir(cfg);

  std::vector<Grid> estimates;
  estimates.reserve(ds.regions.size());
  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    const fs::path path =
        est_dir / (estimate_stem(static_cast<int>(i)) + ".rmg");
    if (!fs::exists(path)) {
      fail(ErrorKind::load,
           "missing " + path.string() + "; run estimate first");
    }
    estimates.push_back(read_grid(path, GridFormat::rmg));
  }

  EvalReport report;
  report.threshold_lo = cfg.eval.outage_lo;
  report.threshold_hi = cfg.eval.outage_hi;
  report.truth_histogram.assign(50, 0);
  report.estimate_histogram.assign(50, 0);

  const std::pair<const char*, const std::vector<int>*> roles[] = {
      {"train", &ds.split.train},
      {"validation", &ds.split.validation},
      {"test", &ds.split.test},
  };
  for (const auto& [name, indices] : roles) {
    if (indices->empty()) continue;
    std::vector<std::string> names;
    std::vector<const Grid*> truths;
    std::vector<const Grid*> preds;
    for (const int i : *indices) {
      if (!ds.regions[static_cast<std::size_t>(i)].ground_truth.has_value()) {
        fail(ErrorKind::load, "region " + region_stem(i) +
                                  " has no ground truth; cannot evaluate");
      }
      names.push_back(region_stem(i));
      truths.push_back(&*ds.regions[static_cast<std::size_t>(i)].ground_truth);
      preds.push_back(&estimates[static_cast<std::size_t>(i)]);
    }
    const EvalReport part = evaluate_pairs(name, names, truths, preds,
                                           cfg.eval.outage_lo,
                                           cfg.eval.outage_hi);
    report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
    report.groups.insert(report.groups.end(), part.groups.begin(),
                         part.groups.end());
    for (std::size_t b = 0; b < report.truth_histogram.size(); ++b) {
      report.truth_histogram[b] += part.truth_histogram[b];
      report.estimate_histogram[b] += part.estimate_histogram[b];
    }
  }

  const fs::path dir = eval_dir(cfg);
  fs::create_directories(dir);
  write_file_bytes(dir / "report.csv", report_csv(report));
  write_file_bytes(dir / "histogram.csv", histogram_csv(report));
  write_file_bytes(dir / "report.txt", report_text(report));
  write_meta(cfg, dir);
  return report;
}

void cmd_pipeline(const ExperimentConfig& cfg) {
  cmd_gen(cfg);
  cmd_sample(cfg);
  if (cfg.estimator.kind == EstimatorKind::rme_gan &&
      cfg.estimator.checkpoint.empty()) {
    cmd_train(cfg);
  }
  cmd_estimate(cfg);
  cmd_eval(cfg);
}

}  // namespace rmap
