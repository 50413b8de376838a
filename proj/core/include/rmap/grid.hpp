// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

namespace rmap {

// Cell address, matrix convention: row 0 is the top edge, col 0 the left.
struct Coord {
  int row = 0;
  int col = 0;

  auto operator<=>(const Coord&) const = default;
};

// Dense row-major scalar field over a rectangular cell grid.
//
// Values are held as double in memory for the benefit of iterative math;
// the on-disk formats quantize to IEEE-754 binary32 (or 8-bit for images),
// see grid_io.hpp. Radio maps are normalized to [0, 1], urban masks are
// strictly {0, 1}.
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<double> values;  // height * width entries, row-major

  static Grid zeros(int height, int width);
  static Grid constant(int height, int width, double value);

  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + c;
  }
  double& at(int r, int c) { return values[idx(r, c)]; }
  const double& at(int r, int c) const { return values[idx(r, c)]; }

  std::size_t size() const { return values.size(); }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
  bool in_bounds(Coord p) const { return in_bounds(p.row, p.col); }
  bool same_shape(const Grid& other) const {
    return height == other.height && width == other.width;
  }
};

// Shape and content validators. All throw Error(ErrorKind::validation) with
// the offending cell in the message; `what` names the argument being checked.
void validate_grid(const Grid& g, const char* what);        // finite, coherent
void validate_normalized(const Grid& g, const char* what);  // plus [0, 1]
void validate_binary(const Grid& g, const char* what);      // plus {0, 1}

struct TransmitterSet {
  std::vector<Coord> positions;

  int count() const { return static_cast<int>(positions.size()); }
};

// Scattered observations of a field: coords[i] holds the cell of psd[i].
// Coordinates are unique within one set.
struct SparseSamples {
  std::vector<Coord> coords;
  std::vector<double> psd;

  int count() const { return static_cast<int>(coords.size()); }
};

void validate_transmitters(const TransmitterSet& tx, int height, int width);
void validate_samples(const SparseSamples& s, int height, int width);

// Everything known about one spatial region. `ground_truth` is present for
// synthetic data and absent for externally collected measurement sets.
struct RegionFeatures {
  int height = 0;
  int width = 0;
  SparseSamples samples;
  Grid urban;               // binary building mask
  TransmitterSet transmitters;
  std::optional<Grid> ground_truth;  // normalized psd
};

void validate_region(const RegionFeatures& region);

// Dense multi-channel encoding consumed by the neural estimator.
struct EncodedInput {
  Grid observations;         // sampled psd scattered onto the grid, 0 elsewhere
  Grid urban;                // building mask channel
  Grid transmitters;         // transmitter one-hot channel
  std::optional<Grid> mask;  // 1 at sampled cells; optional fourth channel

  int channel_count() const { return mask.has_value() ? 4 : 3; }
};

// Builds the channel stack from a region. Observation and mask channels are
// zero wherever no sample exists, so unsampled cells are indistinguishable
// from sampled zeros unless the mask channel is enabled.
EncodedInput encode_input(const RegionFeatures& region, bool with_mask = false);

// Affine dB <-> [0, 1] mapping shared by the scene generator, the loaders
// and the evaluators. Values outside [dmin, dmax] clamp, so denormalize is
// an exact right inverse only on the interior.
double normalize_db(double db, double dmin_db, double dmax_db);
double denormalize_db(double v, double dmin_db, double dmax_db);
Grid normalize_psd(const Grid& raw_db, double dmin_db, double dmax_db);
Grid denormalize_psd(const Grid& normalized, double dmin_db, double dmax_db);

}  // namespace rmap
