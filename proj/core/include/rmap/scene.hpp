// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rmap/grid.hpp"
#include "rmap/rng.hpp"

namespace rmap {

// Parameters of the synthetic scene generator. Power values are dB relative
// to an arbitrary common reference; distances are in cell units.
struct SceneConfig {
  int height = 64;
  int width = 64;

  int n_tx = 1;

  int n_buildings = 3;
  int building_min = 4;   // side length bounds, cells
  int building_max = 12;

  double alpha_min_db = -5.0;  // received power at the reference distance
  double alpha_max_db = 0.0;
  double theta_min = 1.8;      // distance decay exponent
  double theta_max = 2.6;
  double wall_loss_db = 10.0;  // extra loss per intervening building cell
  double noise_sigma_db = 0.0; // shadowing noise std dev, dB domain

  double psd_min_db = -70.0;   // normalization window for stored maps
  double psd_max_db = 10.0;
};

void validate_scene_config(const SceneConfig& cfg);

// Per-transmitter propagation parameters.
struct TxParams {
  double alpha_db = 0.0;
  double theta = 2.0;
};

// Draw order inside generate_region is fixed: transmitters, tx params,
// urban map, then per-cell noise. Each step consumes the shared stream, so
// a region is a pure function of (config, seed).
TransmitterSet sample_transmitters(const SceneConfig& cfg, Rng& rng);
std::vector<TxParams> sample_tx_params(const SceneConfig& cfg, int n_tx,
                                       Rng& rng);

// Axis-aligned rectangular buildings, uniform sizes and placement, rejected
// while they cover a transmitter cell (buildings may overlap each other).
// Throws ErrorKind::generation if a building cannot be placed in 1000 tries.
Grid generate_urban_map(const SceneConfig& cfg, const TransmitterSet& tx,
                        Rng& rng);

// Number of building cells strictly between a and b on the Bresenham line.
// Symmetric: endpoints are canonically ordered before walking.
int wall_count(Coord a, Coord b, const Grid& urban);

// Raw dB map. Per transmitter k:
//   L_k(cell) = alpha_k - 10 * theta_k * log10(max(dist, 0.5))
//               - wall_loss_db * wall_count(tx_k, cell)
// Cells combine transmitters in the linear power domain,
//   psd = 10 * log10(sum_k 10^(L_k / 10)),
// and then receive N(0, noise_sigma_db) shadowing (no draw when sigma = 0).
Grid radiomap_db(const SceneConfig& cfg, const Grid& urban,
                 const TransmitterSet& tx, const std::vector<TxParams>& params,
                 Rng& rng);

struct GeneratedRegion {
  RegionFeatures region;          // ground_truth normalized by the psd window
  std::vector<TxParams> tx_params;
};

GeneratedRegion generate_region(const SceneConfig& cfg, std::uint64_t seed);

// Dataset split, ratio parts train:validation:test.
struct SplitSpec {
  int train = 5;
  int validation = 1;
  int test = 1;
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

// Shuffles region indices and cuts them proportionally to the spec; every
// class with a positive part gets at least one region when n allows it.
SplitIndices make_split(int n_regions, const SplitSpec& spec, Rng& rng);

struct Dataset {
  int height = 0;
  int width = 0;
  double dmin_db = 0.0;
  double dmax_db = 1.0;
  std::uint64_t seed = 0;
  std::vector<RegionFeatures> regions;
  std::vector<std::vector<TxParams>> tx_params;  // empty for external data
  SplitIndices split;
};

// Generates n_regions regions with per-region child seeds. jobs > 1 runs
// region generation on that many threads; outputs are written by index, so
// the result is identical to the serial one.
Dataset build_dataset(const SceneConfig& cfg, int n_regions,
                      std::uint64_t seed, const SplitSpec& spec = {},
                      int jobs = 1);

// Directory layout (all files deterministic, no timestamps):
//   meta.csv                 header dmin,dmax,seed + one row
//   manifest.csv             header idx,tx_row,tx_col, one row per tx
//   split.csv                header idx,role with role train|validation|test
//   region_NNNN_urban.pgm    binary building mask (pixels 0 or 255)
//   region_NNNN_gt.rmg       float ground truth (when present)
//   region_NNNN_gt.pgm       8-bit preview of the same map
//   region_NNNN_samples.csv  sparse observations (when present)
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

// Loads the layout above. Only meta.csv, manifest.csv and the urban masks
// are mandatory, so externally produced directories qualify; gt is taken
// from .rmg when available, falling back to the 8-bit .pgm.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace rmap
