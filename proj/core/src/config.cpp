// SPDX-License-Identifier: Apache-2.0
#include "rmap/config.hpp"

#include <charconv>
#include <functional>
#include <string>
#include <vector>

#include "rmap/error.hpp"
#include "rmap/grid_io.hpp"
#include "rmap/version.hpp"

namespace rmap {
namespace {

[[noreturn]] void fail_line(int line, const std::string& message) {
  fail(ErrorKind::config, message + " at line " + std::to_string(line));
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    fail_line(line, "expected a number, got '" + v + "'");
  }
  return out;
}

long long parse_ll(const std::string& v, int line) {
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    fail_line(line, "expected an integer, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& v, int line) {
  return static_cast<int>(parse_ll(v, line));
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) {
    fail_line(line, "expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail_line(line, "expected true or false, got '" + v + "'");
}

// One config key: how to read it from text and write it back canonically.
struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&, int)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

Field f_double(const char* key, double ExperimentConfig::* ptr) {
  return {key,
          [ptr](ExperimentConfig& c, const std::string& v, int line) {
            c.*ptr = parse_double(v, line);
          },
          [ptr](const ExperimentConfig& c) { return format_double(c.*ptr); }};
}

template <typename Sub>
Field f_double_at(const char* key, Sub ExperimentConfig::* sub,
                  double Sub::* ptr) {
  return {key,
          [sub, ptr](ExperimentConfig& c, const std::string& v, int line) {
            c.*sub.*ptr = parse_double(v, line);
          },
          [sub, ptr](const ExperimentConfig& c) {
            return format_double(c.*sub.*ptr);
          }};
}

template <typename Sub>
Field f_int_at(const char* key, Sub ExperimentConfig::* sub, int Sub::* ptr) {
  return {key,
          [sub, ptr](ExperimentConfig& c, const std::string& v, int line) {
            c.*sub.*ptr = parse_int(v, line);
          },
          [sub, ptr](const ExperimentConfig& c) {
            return std::to_string(c.*sub.*ptr);
          }};
}

template <typename Sub>
Field f_bool_at(const char* key, Sub ExperimentConfig::* sub,
                bool Sub::* ptr) {
  return {key,
          [sub, ptr](ExperimentConfig& c, const std::string& v, int line) {
            c.*sub.*ptr = parse_bool(v, line);
          },
          [sub, ptr](const ExperimentConfig& c) {
            return (c.*sub.*ptr) ? "true" : "false";
          }};
}

// Loss weights live two levels deep (train.phase1.lambdaN).
Field f_weight(const char* key, LossWeights TrainConfig::* phase,
               double LossWeights::* ptr) {
  return {key,
          [phase, ptr](ExperimentConfig& c, const std::string& v, int line) {
            c.train.*phase.*ptr = parse_double(v, line);
          },
          [phase, ptr](const ExperimentConfig& c) {
            return format_double(c.train.*phase.*ptr);
          }};
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;

    f.push_back({"run.seed",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.seed = parse_u64(v, line);
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    f.push_back({"run.out",
                 [](ExperimentConfig& c, const std::string& v, int) {
                   c.out = v;
                 },
                 [](const ExperimentConfig& c) { return c.out.string(); }});
    f.push_back({"run.jobs",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.jobs = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.jobs); }});

    f.push_back(f_int_at("scene.height", &ExperimentConfig::scene,
                         &SceneConfig::height));
    f.push_back(f_int_at("scene.width", &ExperimentConfig::scene,
                         &SceneConfig::width));
    f.push_back(f_int_at("scene.transmitters", &ExperimentConfig::scene,
                         &SceneConfig::n_tx));
    f.push_back(f_int_at("scene.buildings", &ExperimentConfig::scene,
                         &SceneConfig::n_buildings));
    f.push_back(f_int_at("scene.building_min", &ExperimentConfig::scene,
                         &SceneConfig::building_min));
    f.push_back(f_int_at("scene.building_max", &ExperimentConfig::scene,
                         &SceneConfig::building_max));
    f.push_back(f_double_at("scene.alpha_min_db", &ExperimentConfig::scene,
                            &SceneConfig::alpha_min_db));
    f.push_back(f_double_at("scene.alpha_max_db", &ExperimentConfig::scene,
                            &SceneConfig::alpha_max_db));
    f.push_back(f_double_at("scene.theta_min", &ExperimentConfig::scene,
                            &SceneConfig::theta_min));
    f.push_back(f_double_at("scene.theta_max", &ExperimentConfig::scene,
                            &SceneConfig::theta_max));
    f.push_back(f_double_at("scene.wall_loss_db", &ExperimentConfig::scene,
                            &SceneConfig::wall_loss_db));
    f.push_back(f_double_at("scene.noise_sigma_db", &ExperimentConfig::scene,
                            &SceneConfig::noise_sigma_db));
    f.push_back(f_double_at("scene.psd_min_db", &ExperimentConfig::scene,
                            &SceneConfig::psd_min_db));
    f.push_back(f_double_at("scene.psd_max_db", &ExperimentConfig::scene,
                            &SceneConfig::psd_max_db));

    f.push_back({"dataset.regions",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.regions = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.regions);
                 }});
    f.push_back(f_int_at("dataset.split_train", &ExperimentConfig::split,
                         &SplitSpec::train));
    f.push_back(f_int_at("dataset.split_validation", &ExperimentConfig::split,
                         &SplitSpec::validation));
    f.push_back(f_int_at("dataset.split_test", &ExperimentConfig::split,
                         &SplitSpec::test));

    f.push_back({"sampling.setup",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   if (v == "uniform") c.sampling.setup = SamplingSetup::uniform;
                   else if (v == "unbalanced")
                     c.sampling.setup = SamplingSetup::unbalanced;
                   else if (v == "split") c.sampling.setup = SamplingSetup::split;
                   else fail_line(line, "unknown sampling setup '" + v + "'");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(to_string(c.sampling.setup));
                 }});
    f.push_back(f_double_at("sampling.ratio", &ExperimentConfig::sampling,
                            &SamplingConfig::ratio));
    f.push_back(f_double_at("sampling.ratio_lo", &ExperimentConfig::sampling,
                            &SamplingConfig::ratio_lo));
    f.push_back(f_double_at("sampling.ratio_hi", &ExperimentConfig::sampling,
                            &SamplingConfig::ratio_hi));
    f.push_back(f_double_at("sampling.ratio_a", &ExperimentConfig::sampling,
                            &SamplingConfig::ratio_a));
    f.push_back(f_double_at("sampling.ratio_b", &ExperimentConfig::sampling,
                            &SamplingConfig::ratio_b));

    f.push_back({"estimator.kind",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   if (v == "mbi") c.estimator.kind = EstimatorKind::mbi;
                   else if (v == "idw") c.estimator.kind = EstimatorKind::idw;
                   else if (v == "rbf") c.estimator.kind = EstimatorKind::rbf;
                   else if (v == "kriging")
                     c.estimator.kind = EstimatorKind::kriging;
                   else if (v == "rme_gan")
                     c.estimator.kind = EstimatorKind::rme_gan;
                   else fail_line(line, "unknown estimator '" + v + "'");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(to_string(c.estimator.kind));
                 }});
    f.push_back(f_double_at("estimator.idw_power", &ExperimentConfig::estimator,
                            &EstimatorConfig::idw_power));
    f.push_back({"estimator.rbf_kernel",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   if (v == "gaussian")
                     c.estimator.rbf_kernel = RbfKernel::gaussian;
                   else if (v == "multiquadric")
                     c.estimator.rbf_kernel = RbfKernel::multiquadric;
                   else if (v == "thin_plate")
                     c.estimator.rbf_kernel = RbfKernel::thin_plate;
                   else fail_line(line, "unknown rbf kernel '" + v + "'");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(to_string(c.estimator.rbf_kernel));
                 }});
    f.push_back(f_double_at("estimator.rbf_eps", &ExperimentConfig::estimator,
                            &EstimatorConfig::rbf_eps));
    f.push_back(f_double_at("estimator.rbf_ridge", &ExperimentConfig::estimator,
                            &EstimatorConfig::rbf_ridge));
    f.push_back(f_int_at("estimator.kriging_bins", &ExperimentConfig::estimator,
                         &EstimatorConfig::kriging_bins));
    f.push_back({"estimator.checkpoint",
                 [](ExperimentConfig& c, const std::string& v, int) {
                   c.estimator.checkpoint = v;
                 },
                 [](const ExperimentConfig& c) {
                   return c.estimator.checkpoint;
                 }});

    f.push_back(f_int_at("train.epochs", &ExperimentConfig::train,
                         &TrainConfig::epochs));
    f.push_back(f_int_at("train.batch_size", &ExperimentConfig::train,
                         &TrainConfig::batch_size));
    f.push_back({"train.lr",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.adam.lr = parse_double(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return format_double(c.train.adam.lr);
                 }});
    f.push_back({"train.beta1",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.adam.beta1 = parse_double(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return format_double(c.train.adam.beta1);
                 }});
    f.push_back({"train.beta2",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.adam.beta2 = parse_double(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return format_double(c.train.adam.beta2);
                 }});
    f.push_back({"train.preset",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   if (v != "compact" && v != "full256") {
                     fail_line(line, "unknown generator preset '" + v + "'");
                   }
                   c.train.generator.preset = v;
                 },
                 [](const ExperimentConfig& c) {
                   return c.train.generator.preset;
                 }});
    f.push_back({"train.depth",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.generator.depth = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.train.generator.depth);
                 }});
    f.push_back({"train.base_channels",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.generator.base_channels = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.train.generator.base_channels);
                 }});
    f.push_back({"train.disc_base",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.discriminator.base_channels = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.train.discriminator.base_channels);
                 }});
    f.push_back({"train.disc_layers",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.discriminator.conv_layers = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.train.discriminator.conv_layers);
                 }});
    f.push_back({"train.disc_slope",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.discriminator.slope = parse_double(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return format_double(c.train.discriminator.slope);
                 }});
    f.push_back({"train.tau",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.phase.tau = parse_double(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return format_double(c.train.phase.tau);
                 }});
    f.push_back({"train.patience",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.phase.patience = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.train.phase.patience);
                 }});
    f.push_back({"train.max_phase1_epochs",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   c.train.phase.max_phase1_epochs = parse_int(v, line);
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.train.phase.max_phase1_epochs);
                 }});
    f.push_back({"train.conditioning",
                 [](ExperimentConfig& c, const std::string& v, int line) {
                   if (v == "features")
                     c.train.conditioning = Conditioning::features;
                   else if (v == "onehot")
                     c.train.conditioning = Conditioning::literal_onehot;
                   else fail_line(line, "unknown conditioning '" + v + "'");
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(to_string(c.train.conditioning));
                 }});
    f.push_back(f_bool_at("train.nonsaturating", &ExperimentConfig::train,
                          &TrainConfig::nonsaturating));
    f.push_back(f_bool_at("train.input_mask", &ExperimentConfig::train,
                          &TrainConfig::input_mask));
    f.push_back(f_int_at("train.hpf_bins", &ExperimentConfig::train,
                         &TrainConfig::hpf_bins));
    f.push_back(f_int_at("train.geo_segments", &ExperimentConfig::train,
                         &TrainConfig::geo_segments));
    f.push_back(f_int_at("train.ssim_levels", &ExperimentConfig::train,
                         &TrainConfig::ssim_levels));

    f.push_back(f_weight("loss.phase1_adv", &TrainConfig::phase1,
                         &LossWeights::lambda1));
    f.push_back(f_weight("loss.phase1_mse", &TrainConfig::phase1,
                         &LossWeights::lambda2));
    f.push_back(f_weight("loss.phase1_tv", &TrainConfig::phase1,
                         &LossWeights::lambda3));
    f.push_back(f_weight("loss.phase1_gradient", &TrainConfig::phase1,
                         &LossWeights::lambda4));
    f.push_back(f_weight("loss.phase2_adv", &TrainConfig::phase2,
                         &LossWeights::lambda1));
    f.push_back(f_weight("loss.phase2_mse", &TrainConfig::phase2,
                         &LossWeights::lambda2));
    f.push_back(f_weight("loss.phase2_tv", &TrainConfig::phase2,
                         &LossWeights::lambda3));
    f.push_back(f_weight("loss.phase2_ssim", &TrainConfig::phase2,
                         &LossWeights::lambda5));
    f.push_back(f_weight("loss.phase2_geo", &TrainConfig::phase2,
                         &LossWeights::lambda6));
    f.push_back(f_weight("loss.phase2_hpf", &TrainConfig::phase2,
                         &LossWeights::lambda7));

    f.push_back(f_double_at("eval.outage_lo", &ExperimentConfig::eval,
                            &EvalConfig::outage_lo));
    f.push_back(f_double_at("eval.outage_hi", &ExperimentConfig::eval,
                            &EvalConfig::outage_hi));
    return f;
  }();
  return fields;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : schema()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

const char* to_string(SamplingSetup setup) {
  switch (setup) {
    case SamplingSetup::uniform: return "uniform";
    case SamplingSetup::unbalanced: return "unbalanced";
    case SamplingSetup::split: return "split";
  }
  return "?";
}

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::mbi: return "mbi";
    case EstimatorKind::idw: return "idw";
    case EstimatorKind::rbf: return "rbf";
    case EstimatorKind::kriging: return "kriging";
    case EstimatorKind::rme_gan: return "rme_gan";
  }
  return "?";
}

const char* to_string(RbfKernel kernel) {
  switch (kernel) {
    case RbfKernel::gaussian: return "gaussian";
    case RbfKernel::multiquadric: return "multiquadric";
    case RbfKernel::thin_plate: return "thin_plate";
  }
  return "?";
}

const char* to_string(Conditioning conditioning) {
  return conditioning == Conditioning::features ? "features" : "onehot";
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string raw =
        text.substr(pos, eol == std::string::npos ? eol : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail_line(line_no, "expected 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "meta.version") continue;  // run.meta files parse as configs
    const Field* field = find_field(key);
    if (field == nullptr) {
      fail_line(line_no, "unknown key '" + key + "'");
    }
    field->set(cfg, value, line_no);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config_text(read_file_bytes(path));
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const Field& f : schema()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

std::string run_meta_text(const ExperimentConfig& cfg) {
  std::string out = "meta.version = ";
  out += kVersionString;
  out += '\n';
  out += serialize_config(cfg);
  return out;
}

}  // namespace rmap
