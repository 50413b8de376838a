// SPDX-License-Identifier: Apache-2.0
#include "rmap/scene.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "rmap/error.hpp"
#include "rmap/grid_io.hpp"
#include "rmap/ldpl.hpp"  // kDistanceFloorCells, shared with the estimator

namespace rmap {

namespace {

constexpr int kPlacementAttempts = 1000;
constexpr std::uint64_t kSplitStream = 0x73706c6974ull;  // distinct from region ids

std::string region_stem(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "region_%04d", idx);
  return buf;
}

long parse_long(const std::string& s, const std::filesystem::path& path,
                std::size_t row) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    fail(ErrorKind::load, path.string() + ": bad integer \"" + s +
                              "\" in row " + std::to_string(row));
  }
  return v;
}

double parse_double(const std::string& s, const std::filesystem::path& path,
                    std::size_t row) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty() ||
      !std::isfinite(v)) {
    fail(ErrorKind::load, path.string() + ": bad decimal \"" + s +
                              "\" in row " + std::to_string(row));
  }
  return v;
}

}  // namespace

void validate_scene_config(const SceneConfig& cfg) {
  if (cfg.height < 2 || cfg.width < 2) {
    fail(ErrorKind::parameter, "scene grid must be at least 2x2, got " +
                                   std::to_string(cfg.height) + "x" +
                                   std::to_string(cfg.width));
  }
  const long long cells =
      static_cast<long long>(cfg.height) * static_cast<long long>(cfg.width);
  if (cfg.n_tx < 1 || cfg.n_tx > cells) {
    fail(ErrorKind::parameter,
         "n_tx must be in [1, cells], got " + std::to_string(cfg.n_tx));
  }
  if (cfg.n_buildings < 0) {
    fail(ErrorKind::parameter, "n_buildings must be non-negative");
  }
  if (cfg.n_buildings > 0) {
    if (cfg.building_min < 1 || cfg.building_min > cfg.building_max) {
      fail(ErrorKind::parameter, "building size bounds out of order");
    }
    if (cfg.building_max > std::min(cfg.height, cfg.width)) {
      fail(ErrorKind::parameter, "building_max exceeds grid size");
    }
  }
  if (cfg.alpha_min_db > cfg.alpha_max_db) {
    fail(ErrorKind::parameter, "alpha bounds out of order");
  }
  if (!(cfg.theta_min > 0.0) || cfg.theta_min > cfg.theta_max) {
    fail(ErrorKind::parameter, "theta bounds must satisfy 0 < min <= max");
  }
  if (cfg.wall_loss_db < 0.0) {
    fail(ErrorKind::parameter, "wall_loss_db must be non-negative");
  }
  if (cfg.noise_sigma_db < 0.0) {
    fail(ErrorKind::parameter, "noise_sigma_db must be non-negative");
  }
  if (!(cfg.psd_min_db < cfg.psd_max_db)) {
    fail(ErrorKind::parameter, "psd window requires psd_min_db < psd_max_db");
  }
}

TransmitterSet sample_transmitters(const SceneConfig& cfg, Rng& rng) {
  TransmitterSet tx;
  std::set<Coord> seen;
  while (tx.count() < cfg.n_tx) {
    Coord p;
    p.row = static_cast<int>(rng.next_below(cfg.height));
    p.col = static_cast<int>(rng.next_below(cfg.width));
    if (seen.insert(p).second) {
      tx.positions.push_back(p);
    }
  }
  return tx;
}

std::vector<TxParams> sample_tx_params(const SceneConfig& cfg, int n_tx,
                                       Rng& rng) {
  std::vector<TxParams> params(static_cast<std::size_t>(n_tx));
  for (TxParams& p : params) {
    p.alpha_db = rng.uniform(cfg.alpha_min_db, cfg.alpha_max_db);
    p.theta = rng.uniform(cfg.theta_min, cfg.theta_max);
  }
  return params;
}

Grid generate_urban_map(const SceneConfig& cfg, const TransmitterSet& tx,
                        Rng& rng) {
  Grid g = Grid::zeros(cfg.height, cfg.width);
  for (int b = 0; b < cfg.n_buildings; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const int hb = cfg.building_min +
                     static_cast<int>(rng.next_below(
                         cfg.building_max - cfg.building_min + 1));
      const int wb = cfg.building_min +
                     static_cast<int>(rng.next_below(
                         cfg.building_max - cfg.building_min + 1));
      const int r0 = static_cast<int>(rng.next_below(cfg.height - hb + 1));
      const int c0 = static_cast<int>(rng.next_below(cfg.width - wb + 1));
      bool covers_tx = false;
      for (const Coord& p : tx.positions) {
        if (p.row >= r0 && p.row < r0 + hb && p.col >= c0 && p.col < c0 + wb) {
          covers_tx = true;
          break;
        }
      }
      if (covers_tx) continue;
      for (int r = r0; r < r0 + hb; ++r) {
        for (int c = c0; c < c0 + wb; ++c) {
          g.at(r, c) = 1.0;
        }
      }
      placed = true;
    }
    if (!placed) {
      fail(ErrorKind::generation,
           "could not place building " + std::to_string(b) + " after " +
               std::to_string(kPlacementAttempts) +
               " attempts without covering a transmitter");
    }
  }
  return g;
}

int wall_count(Coord a, Coord b, const Grid& urban) {
  if (!urban.in_bounds(a) || !urban.in_bounds(b)) {
    fail(ErrorKind::validation, "wall_count: endpoint outside grid");
  }
  if (b < a) std::swap(a, b);  // canonical order makes the count symmetric
  int x = a.col;
  int y = a.row;
  const int x1 = b.col;
  const int y1 = b.row;
  const int dx = std::abs(x1 - x);
  const int sx = x < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y);
  const int sy = y < y1 ? 1 : -1;
  int err = dx + dy;
  int count = 0;
  for (;;) {
    const bool at_start = (x == a.col && y == a.row);
    const bool at_end = (x == x1 && y == y1);
    if (!at_start && !at_end && urban.at(y, x) != 0.0) ++count;
    if (at_end) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return count;
}

Grid radiomap_db(const SceneConfig& cfg, const Grid& urban,
                 const TransmitterSet& tx, const std::vector<TxParams>& params,
                 Rng& rng) {
  validate_binary(urban, "radiomap urban mask");
  validate_transmitters(tx, urban.height, urban.width);
  if (params.size() != tx.positions.size()) {
    fail(ErrorKind::validation,
         "radiomap_db: params/transmitter count mismatch");
  }
  Grid out = Grid::zeros(urban.height, urban.width);
  for (int r = 0; r < urban.height; ++r) {
    for (int c = 0; c < urban.width; ++c) {
      double linear = 0.0;
      for (std::size_t k = 0; k < params.size(); ++k) {
        const Coord t = tx.positions[k];
        const double dist = std::max(
            std::hypot(static_cast<double>(r - t.row),
                       static_cast<double>(c - t.col)),
            kDistanceFloorCells);
        const double loss_db =
            params[k].alpha_db - 10.0 * params[k].theta * std::log10(dist) -
            cfg.wall_loss_db * wall_count(t, {r, c}, urban);
        linear += std::pow(10.0, loss_db / 10.0);
      }
      double db = 10.0 * std::log10(linear);
      if (cfg.noise_sigma_db > 0.0) {
        db += rng.normal(0.0, cfg.noise_sigma_db);
      }
      out.at(r, c) = db;
    }
  }
  return out;
}

GeneratedRegion generate_region(const SceneConfig& cfg, std::uint64_t seed) {
  validate_scene_config(cfg);
  Rng rng(seed);
  GeneratedRegion out;
  const TransmitterSet tx = sample_transmitters(cfg, rng);
  out.tx_params = sample_tx_params(cfg, cfg.n_tx, rng);
  Grid urban = generate_urban_map(cfg, tx, rng);
  const Grid db = radiomap_db(cfg, urban, tx, out.tx_params, rng);
  out.region.height = cfg.height;
  out.region.width = cfg.width;
  out.region.urban = std::move(urban);
  out.region.transmitters = tx;
  out.region.ground_truth = normalize_psd(db, cfg.psd_min_db, cfg.psd_max_db);
  return out;
}

SplitIndices make_split(int n_regions, const SplitSpec& spec, Rng& rng) {
  if (n_regions < 1) {
    fail(ErrorKind::parameter, "make_split: need at least one region");
  }
  if (spec.train < 0 || spec.validation < 0 || spec.test < 0 ||
      spec.train + spec.validation + spec.test == 0) {
    fail(ErrorKind::parameter, "make_split: invalid split parts");
  }
  std::vector<int> idx(static_cast<std::size_t>(n_regions));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i + 1 < n_regions; ++i) {
    const int j =
        i + static_cast<int>(rng.next_below(
                static_cast<std::uint64_t>(n_regions - i)));
    std::swap(idx[i], idx[j]);
  }

  const double total = spec.train + spec.validation + spec.test;
  const double exact[3] = {n_regions * spec.train / total,
                           n_regions * spec.validation / total,
                           n_regions * spec.test / total};
  int count[3];
  for (int i = 0; i < 3; ++i) count[i] = static_cast<int>(exact[i]);
  int rem = n_regions - (count[0] + count[1] + count[2]);
  while (rem > 0) {
    int best = -1;
    double best_frac = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double frac = exact[i] - count[i];
      if (frac > best_frac) {
        best_frac = frac;
        best = i;
      }
    }
    ++count[best];
    --rem;
  }
  // Every positive part gets at least one region when n allows it.
  const int parts[3] = {spec.train, spec.validation, spec.test};
  int positive = 0;
  for (int p : parts) positive += (p > 0);
  if (n_regions >= positive) {
    for (int i = 0; i < 3; ++i) {
      while (parts[i] > 0 && count[i] == 0) {
        int donor = 0;
        for (int j = 1; j < 3; ++j) {
          if (count[j] > count[donor]) donor = j;
        }
        --count[donor];
        ++count[i];
      }
    }
  }

  SplitIndices split;
  auto take = [&](int from, int n) {
    std::vector<int> out(idx.begin() + from, idx.begin() + from + n);
    std::sort(out.begin(), out.end());
    return out;
  };
  split.train = take(0, count[0]);
  split.validation = take(count[0], count[1]);
  split.test = take(count[0] + count[1], count[2]);
  return split;
}

Dataset build_dataset(const SceneConfig& cfg, int n_regions,
                      std::uint64_t seed, const SplitSpec& spec, int jobs) {
  validate_scene_config(cfg);
  if (n_regions < 1) {
    fail(ErrorKind::parameter, "build_dataset: need at least one region");
  }
  if (jobs < 1) jobs = 1;
  jobs = std::min(jobs, n_regions);

  std::vector<GeneratedRegion> generated(static_cast<std::size_t>(n_regions));
  if (jobs == 1) {
    for (int i = 0; i < n_regions; ++i) {
      generated[i] = generate_region(cfg, Rng::mix(seed, i));
    }
  } else {
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    ErrorKind first_kind = ErrorKind::generation;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
      workers.emplace_back([&]() {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= n_regions || failed.load()) return;
          try {
            generated[i] = generate_region(cfg, Rng::mix(seed, i));
          } catch (const Error& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!failed.exchange(true)) {
              first_error = e.what();
              first_kind = e.kind();
            }
            return;
          }
        }
      });
    }
    for (std::thread& t : workers) t.join();
    if (failed.load()) {
      fail(first_kind, first_error);
    }
  }

  Dataset ds;
  ds.height = cfg.height;
  ds.width = cfg.width;
  ds.dmin_db = cfg.psd_min_db;
  ds.dmax_db = cfg.psd_max_db;
  ds.seed = seed;
  ds.regions.reserve(generated.size());
  ds.tx_params.reserve(generated.size());
  for (GeneratedRegion& g : generated) {
    ds.regions.push_back(std::move(g.region));
    ds.tx_params.push_back(std::move(g.tx_params));
  }
  Rng split_rng = Rng::child(seed, kSplitStream);
  ds.split = make_split(n_regions, spec, split_rng);
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  if (ds.regions.empty()) {
    fail(ErrorKind::validation, "save_dataset: dataset has no regions");
  }
  std::string meta = "dmin,dmax,seed\n";
  meta += format_double(ds.dmin_db) + "," + format_double(ds.dmax_db) + "," +
          std::to_string(ds.seed) + "\n";
  write_file_bytes(dir / "meta.csv", meta);

  std::string manifest = "idx,tx_row,tx_col\n";
  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    for (const Coord& p : ds.regions[i].transmitters.positions) {
      manifest += std::to_string(i) + "," + std::to_string(p.row) + "," +
                  std::to_string(p.col) + "\n";
    }
  }
  write_file_bytes(dir / "manifest.csv", manifest);

  std::vector<std::pair<int, const char*>> roles;
  for (int i : ds.split.train) roles.emplace_back(i, "train");
  for (int i : ds.split.validation) roles.emplace_back(i, "validation");
  for (int i : ds.split.test) roles.emplace_back(i, "test");
  std::sort(roles.begin(), roles.end());
  std::string split = "idx,role\n";
  for (const auto& [i, role] : roles) {
    split += std::to_string(i) + "," + role + "\n";
  }
  write_file_bytes(dir / "split.csv", split);

  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    const RegionFeatures& region = ds.regions[i];
    const std::string stem = region_stem(static_cast<int>(i));
    write_grid(region.urban, dir / (stem + "_urban.pgm"), GridFormat::pgm);
    if (region.ground_truth.has_value()) {
      write_grid(*region.ground_truth, dir / (stem + "_gt.rmg"),
                 GridFormat::rmg);
      write_grid(*region.ground_truth, dir / (stem + "_gt.pgm"),
                 GridFormat::pgm);
    }
    if (region.samples.count() > 0) {
      write_samples_csv(region.samples, dir / (stem + "_samples.csv"));
    }
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.csv";
  const auto manifest_path = dir / "manifest.csv";
  if (!std::filesystem::exists(meta_path)) {
    fail(ErrorKind::load, "missing " + meta_path.string());
  }
  if (!std::filesystem::exists(manifest_path)) {
    fail(ErrorKind::load, "missing " + manifest_path.string());
  }

  const auto meta = read_csv_rows(meta_path);
  if (meta.size() != 2 || meta[0] != std::vector<std::string>{"dmin", "dmax",
                                                              "seed"} ||
      meta[1].size() != 3) {
    fail(ErrorKind::load,
         meta_path.string() + ": expected header dmin,dmax,seed and one row");
  }
  Dataset ds;
  ds.dmin_db = parse_double(meta[1][0], meta_path, 1);
  ds.dmax_db = parse_double(meta[1][1], meta_path, 1);
  if (!(ds.dmin_db < ds.dmax_db)) {
    fail(ErrorKind::load, meta_path.string() + ": dmin must be below dmax");
  }
  ds.seed = static_cast<std::uint64_t>(parse_long(meta[1][2], meta_path, 1));

  const auto manifest = read_csv_rows(manifest_path);
  if (manifest.empty() ||
      manifest[0] != std::vector<std::string>{"idx", "tx_row", "tx_col"}) {
    fail(ErrorKind::load,
         manifest_path.string() + ": expected header idx,tx_row,tx_col");
  }
  std::vector<TransmitterSet> tx_by_region;
  for (std::size_t r = 1; r < manifest.size(); ++r) {
    if (manifest[r].size() != 3) {
      fail(ErrorKind::load, manifest_path.string() + ": row " +
                                std::to_string(r) + " needs 3 fields");
    }
    const long idx = parse_long(manifest[r][0], manifest_path, r);
    if (idx < 0) {
      fail(ErrorKind::load, manifest_path.string() + ": negative region index");
    }
    if (static_cast<std::size_t>(idx) >= tx_by_region.size()) {
      tx_by_region.resize(static_cast<std::size_t>(idx) + 1);
    }
    Coord p;
    p.row = static_cast<int>(parse_long(manifest[r][1], manifest_path, r));
    p.col = static_cast<int>(parse_long(manifest[r][2], manifest_path, r));
    tx_by_region[static_cast<std::size_t>(idx)].positions.push_back(p);
  }
  if (tx_by_region.empty()) {
    fail(ErrorKind::load, manifest_path.string() + ": no regions listed");
  }
  for (std::size_t i = 0; i < tx_by_region.size(); ++i) {
    if (tx_by_region[i].positions.empty()) {
      fail(ErrorKind::load, manifest_path.string() +
                                ": no transmitters for region " +
                                std::to_string(i));
    }
  }

  for (std::size_t i = 0; i < tx_by_region.size(); ++i) {
    const std::string stem = region_stem(static_cast<int>(i));
    const auto urban_path = dir / (stem + "_urban.pgm");
    if (!std::filesystem::exists(urban_path)) {
      fail(ErrorKind::load, "missing " + urban_path.string());
    }
    RegionFeatures region;
    region.urban = read_grid(urban_path, GridFormat::pgm);
    try {
      validate_binary(region.urban, "urban mask");
    } catch (const Error& e) {
      fail(ErrorKind::load, urban_path.string() + ": " + e.what());
    }
    region.height = region.urban.height;
    region.width = region.urban.width;
    region.transmitters = tx_by_region[i];

    const auto gt_rmg = dir / (stem + "_gt.rmg");
    const auto gt_pgm = dir / (stem + "_gt.pgm");
    if (std::filesystem::exists(gt_rmg)) {
      region.ground_truth = read_grid(gt_rmg, GridFormat::rmg);
    } else if (std::filesystem::exists(gt_pgm)) {
      region.ground_truth = read_grid(gt_pgm, GridFormat::pgm);
    }
    const auto samples_path = dir / (stem + "_samples.csv");
    if (std::filesystem::exists(samples_path)) {
      region.samples = read_samples_csv(samples_path);
    }
    try {
      validate_region(region);
    } catch (const Error& e) {
      fail(ErrorKind::load,
           "region " + std::to_string(i) + " in " + dir.string() + ": " +
               e.what());
    }

    if (!ds.regions.empty() &&
        (region.height != ds.height || region.width != ds.width)) {
      fail(ErrorKind::load, "region " + std::to_string(i) +
                                " shape differs from region 0");
    }
    if (ds.regions.empty()) {
      ds.height = region.height;
      ds.width = region.width;
    }
    ds.regions.push_back(std::move(region));
  }

  const auto split_path = dir / "split.csv";
  if (std::filesystem::exists(split_path)) {
    const auto rows = read_csv_rows(split_path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"idx", "role"}) {
      fail(ErrorKind::load, split_path.string() + ": expected header idx,role");
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != 2) {
        fail(ErrorKind::load, split_path.string() + ": row " +
                                  std::to_string(r) + " needs 2 fields");
      }
      const long idx = parse_long(rows[r][0], split_path, r);
      if (idx < 0 || static_cast<std::size_t>(idx) >= ds.regions.size()) {
        fail(ErrorKind::load, split_path.string() + ": region index " +
                                  std::to_string(idx) + " out of range");
      }
      const std::string& role = rows[r][1];
      if (role == "train") {
        ds.split.train.push_back(static_cast<int>(idx));
      } else if (role == "validation") {
        ds.split.validation.push_back(static_cast<int>(idx));
      } else if (role == "test") {
        ds.split.test.push_back(static_cast<int>(idx));
      } else {
        fail(ErrorKind::load,
             split_path.string() + ": unknown role \"" + role + "\"");
      }
    }
  }
  return ds;
}

}  // namespace rmap
