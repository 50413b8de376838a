// SPDX-License-Identifier: Apache-2.0
// Command line front end: wires the config file and global flag overrides
// into the pipeline stage functions.
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "rmap/config.hpp"
#include "rmap/error.hpp"
#include "rmap/pipeline.hpp"
#include "rmap/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"radio map estimation workbench"};
  app.set_version_flag("--version", rmap::kVersionString);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "override run.seed");
  CLI::Option* jobs_opt =
      app.add_option("--jobs", jobs, "override run.jobs");
  CLI::Option* out_opt =
      app.add_option("--out", out, "override run.out (output directory)");
  app.add_option("--config", config_path, "experiment config file");

  CLI::App* gen =
      app.add_subcommand("gen", "generate the synthetic dataset");
  CLI::App* sample =
      app.add_subcommand("sample", "draw sparse observations per region");
  CLI::App* estimate =
      app.add_subcommand("estimate", "estimate dense maps from samples");
  CLI::App* train =
      app.add_subcommand("train", "train the adversarial estimator");
  CLI::App* eval =
      app.add_subcommand("eval", "score estimates against ground truth");
  CLI::App* pipeline =
      app.add_subcommand("pipeline", "run every stage in order");

  CLI11_PARSE(app, argc, argv);

  try {
    rmap::ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = rmap::load_config(config_path);
    }
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (jobs_opt->count() > 0) cfg.jobs = jobs;
    if (out_opt->count() > 0) cfg.out = out;

    if (gen->parsed()) {
      rmap::cmd_gen(cfg);
    } else if (sample->parsed()) {
      rmap::cmd_sample(cfg);
    } else if (estimate->parsed()) {
      rmap::cmd_estimate(cfg);
    } else if (train->parsed()) {
      rmap::cmd_train(cfg);
    } else if (eval->parsed()) {
      rmap::cmd_eval(cfg);
    } else if (pipeline->parsed()) {
      rmap::cmd_pipeline(cfg);
    }
  } catch (const rmap::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", rmap::to_string(e.kind()),
                 e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
