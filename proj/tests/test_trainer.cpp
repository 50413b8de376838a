// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rmap/checkpoint.hpp"
#include "rmap/error.hpp"
#include "rmap/sampling.hpp"
#include "rmap/scene.hpp"
#include "rmap/trainer.hpp"

using namespace rmap;
namespace fs = std::filesystem;

namespace {
Dataset tiny_dataset(int n_regions, int side, std::uint64_t seed) {
  SceneConfig sc;
  sc.height = side;
  sc.width = side;
  sc.n_buildings = 2;
  sc.building_min = 2;
  sc.building_max = 4;
  Dataset ds = build_dataset(sc, n_regions, seed, SplitSpec{4, 1, 1});
  Rng rng(seed + 17);
  for (auto& r : ds.regions) {
    r.samples = sample_uniform(*r.ground_truth, 0.15, rng);
  }
  return ds;
}

TrainConfig tiny_config() {
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 2;
  tc.seed = 5;
  tc.generator.depth = 2;
  tc.generator.base_channels = 4;
  tc.discriminator.base_channels = 4;
  tc.discriminator.conv_layers = 2;
  tc.ssim_levels = 1;
  tc.hpf_bins = 8;
  tc.geo_segments = 8;
  return tc;
}

std::vector<std::vector<double>> param_snapshot(std::vector<Param*> ps) {
  std::vector<std::vector<double>> out;
  for (const Param* p : ps) out.push_back(p->value);
  return out;
}
}  // namespace

TEST_CASE("region aux reproduces a clean propagation field") {
  SceneConfig sc;
  sc.height = 16;
  sc.width = 16;
  sc.n_buildings = 0;
  GeneratedRegion gr = generate_region(sc, 77);
  Rng rng(78);
  gr.region.samples = sample_uniform(*gr.region.ground_truth, 0.2, rng);

  const RegionAux aux = make_region_aux(gr.region, 8, 8);
  REQUIRE(aux.z.same_shape(*gr.region.ground_truth));
  double worst = 0.0;
  for (std::size_t i = 0; i < aux.z.values.size(); ++i) {
    worst = std::max(worst, std::fabs(aux.z.values[i] -
                                      gr.region.ground_truth->values[i]));
    CHECK(aux.z.values[i] >= 0.0);
    CHECK(aux.z.values[i] <= 1.0);
  }
  CHECK(worst < 1e-8);  // noiseless single-emitter fit is exact

  // Downsampled observations come from the sample set itself.
  CHECK(aux.down.count() >= 1);
  CHECK(aux.down.count() <= 8);
  for (int i = 0; i < aux.down.count(); ++i) {
    bool found = false;
    for (int j = 0; j < gr.region.samples.count(); ++j) {
      if (gr.region.samples.coords[j] == aux.down.coords[i] &&
          gr.region.samples.psd[j] == aux.down.psd[i]) {
        found = true;
      }
    }
    CHECK(found);
  }

  CHECK(aux.hpf.bins.size() == 8);
  CHECK(aux.hpf.coeffs.size() == 8);
  CHECK(aux.hpf.height == 16);
}

TEST_CASE("region aux falls back to the mean when the fit degenerates") {
  SceneConfig sc;
  sc.height = 16;
  sc.width = 16;
  sc.n_buildings = 0;
  GeneratedRegion gr = generate_region(sc, 79);
  gr.region.samples.coords = {{3, 4}};
  gr.region.samples.psd = {0.42};
  const RegionAux aux = make_region_aux(gr.region, 4, 4);
  for (const double v : aux.z.values) CHECK(v == doctest::Approx(0.42));
}

TEST_CASE("trainer rejects inconsistent configurations") {
  const Dataset ds = tiny_dataset(6, 16, 2);
  TrainConfig tc = tiny_config();
  tc.epochs = 0;
  CHECK_THROWS_AS(Trainer(ds, tc), Error);

  tc = tiny_config();
  tc.generator.in_channels = 4;  // mask channel not enabled
  CHECK_THROWS_AS(Trainer(ds, tc), Error);

  tc = tiny_config();
  CHECK_THROWS_AS(Trainer(Dataset{}, tc), Error);

  tc = tiny_config();
  tc.phase1.lambda2 = -1.0;
  CHECK_THROWS_AS(Trainer(ds, tc), Error);
}

TEST_CASE("discriminator stays untouched by generator steps at zero adversarial weight") {
  const Dataset ds = tiny_dataset(6, 16, 3);
  TrainConfig tc = tiny_config();
  tc.phase1 = LossWeights{0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  Trainer tr(ds, tc);

  const auto before = param_snapshot(tr.discriminator().params());
  const double g = tr.step_generator({0, 1});
  CHECK(std::isfinite(g));
  const auto after = param_snapshot(tr.discriminator().params());
  CHECK(before == after);

  // A discriminator step, in contrast, moves its parameters.
  const double d = tr.step_discriminator({0, 1});
  CHECK(std::isfinite(d));
  CHECK(param_snapshot(tr.discriminator().params()) != before);

  CHECK_THROWS_AS(tr.step_discriminator({99}), Error);
}

TEST_CASE("generator steps move generator parameters and lower nothing unseen") {
  const Dataset ds = tiny_dataset(6, 16, 4);
  Trainer tr(ds, tiny_config());
  const auto before = param_snapshot(tr.generator().params());
  const double g1 = tr.step_generator({0, 1});
  CHECK(std::isfinite(g1));
  CHECK(param_snapshot(tr.generator().params()) != before);
  const double v = tr.validation_nmse();
  CHECK(std::isfinite(v));
  CHECK(v >= 0.0);
}

TEST_CASE("training runs are bit-for-bit reproducible") {
  const Dataset ds = tiny_dataset(6, 16, 5);
  const TrainConfig tc = tiny_config();
  TrainResult a = train(ds, tc);
  TrainResult b = train(ds, tc);
  REQUIRE(a.history.epochs.size() == 2);
  REQUIRE(b.history.epochs.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.history.epochs[i].d_loss == b.history.epochs[i].d_loss);
    CHECK(a.history.epochs[i].g_loss == b.history.epochs[i].g_loss);
    CHECK(a.history.epochs[i].val_nmse == b.history.epochs[i].val_nmse);
    CHECK(a.history.epochs[i].epoch == static_cast<int>(i) + 1);
  }
  // The moved-out generators agree on fresh input.
  std::vector<EncodedInput> probe = {
      EncodedInput{Grid::constant(16, 16, 0.25), Grid::constant(16, 16, 0.0),
                   Grid::constant(16, 16, 0.0), std::nullopt}};
  const Tensor4 x = batch_from_inputs(probe);
  CHECK(a.generator.forward(x).v == b.generator.forward(x).v);
}

TEST_CASE("the phase controller hands epochs to phase 2 at the cap") {
  const Dataset ds = tiny_dataset(6, 16, 6);
  TrainConfig tc = tiny_config();
  tc.epochs = 3;
  tc.phase.max_phase1_epochs = 1;
  const TrainResult r = train(ds, tc);
  REQUIRE(r.history.epochs.size() == 3);
  CHECK(r.history.epochs[0].phase == 1);
  CHECK(r.history.epochs[1].phase == 2);
  CHECK(r.history.epochs[2].phase == 2);
  CHECK(r.history.phase2_onset == 2);
  CHECK(r.history.phase.phase == 2);
}

TEST_CASE("checkpoint files land next to the run and reload") {
  const fs::path dir = fs::temp_directory_path() / "rmap_tests" / "trainer_ck";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Dataset ds = tiny_dataset(6, 16, 7);
  TrainConfig tc = tiny_config();
  tc.checkpoint_dir = dir;
  TrainResult r = train(ds, tc);
  CHECK(fs::exists(dir / "last.ckpt"));
  CHECK(fs::exists(dir / "final.ckpt"));

  const Checkpoint ck = load_checkpoint((dir / "final.ckpt").string());
  CHECK(ck.phase.epoch == 2);
  Generator g = generator_from_checkpoint(ck);
  std::vector<EncodedInput> probe = {
      EncodedInput{Grid::constant(16, 16, 0.5), Grid::constant(16, 16, 0.0),
                   Grid::constant(16, 16, 0.0), std::nullopt}};
  const Tensor4 x = batch_from_inputs(probe);
  const Tensor4 y_live = r.generator.forward(x);
  const Tensor4 y_ck = g.forward(x);
  CHECK(oracle::max_rel_err(y_live.v, y_ck.v) < 1e-5);
}

TEST_CASE("validation requires a validation split") {
  SceneConfig sc;
  sc.height = 16;
  sc.width = 16;
  sc.n_buildings = 0;
  Dataset ds = build_dataset(sc, 4, 9, SplitSpec{1, 0, 0});
  Rng rng(10);
  for (auto& r : ds.regions) {
    r.samples = sample_uniform(*r.ground_truth, 0.15, rng);
  }
  CHECK(ds.split.validation.empty());
  Trainer tr(ds, tiny_config());
  CHECK_THROWS_AS(tr.validation_nmse(), Error);
}

TEST_CASE("mask conditioning widens the input and stays consistent") {
  Dataset ds = tiny_dataset(6, 16, 11);
  TrainConfig tc = tiny_config();
  tc.input_mask = true;
  tc.generator.in_channels = 4;
  Trainer tr(ds, tc);
  const double g = tr.step_generator({0, 1});
  CHECK(std::isfinite(g));
  const double d = tr.step_discriminator({2, 3});
  CHECK(std::isfinite(d));
}
