// SPDX-License-Identifier: Apache-2.0
#include "rmap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "rmap/error.hpp"

namespace rmap {

Grid Grid::zeros(int height, int width) {
  return constant(height, width, 0.0);
}

Grid Grid::constant(int height, int width, double value) {
  if (height <= 0 || width <= 0) {
    fail(ErrorKind::parameter, "grid dimensions must be positive, got " +
                                   std::to_string(height) + "x" +
                                   std::to_string(width));
  }
  Grid g;
  g.height = height;
  g.width = width;
  g.values.assign(static_cast<std::size_t>(height) * width, value);
  return g;
}

void validate_grid(const Grid& g, const char* what) {
  if (g.height <= 0 || g.width <= 0) {
    fail(ErrorKind::validation, std::string(what) + ": non-positive shape " +
                                    std::to_string(g.height) + "x" +
                                    std::to_string(g.width));
  }
  const std::size_t expect =
      static_cast<std::size_t>(g.height) * static_cast<std::size_t>(g.width);
  if (g.values.size() != expect) {
    fail(ErrorKind::validation,
         std::string(what) + ": value count " +
             std::to_string(g.values.size()) + " does not match shape " +
             std::to_string(g.height) + "x" + std::to_string(g.width));
  }
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!std::isfinite(g.values[i])) {
      fail(ErrorKind::validation,
           std::string(what) + ": non-finite value at cell (" +
               std::to_string(i / g.width) + ", " + std::to_string(i % g.width) +
               ")");
    }
  }
}

void validate_normalized(const Grid& g, const char* what) {
  validate_grid(g, what);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double v = g.values[i];
    if (v < 0.0 || v > 1.0) {
      fail(ErrorKind::validation,
           std::string(what) + ": value " + std::to_string(v) +
               " outside [0, 1] at cell (" + std::to_string(i / g.width) +
               ", " + std::to_string(i % g.width) + ")");
    }
  }
}

void validate_binary(const Grid& g, const char* what) {
  validate_grid(g, what);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double v = g.values[i];
    if (v != 0.0 && v != 1.0) {
      fail(ErrorKind::validation,
           std::string(what) + ": value " + std::to_string(v) +
               " is not 0 or 1 at cell (" + std::to_string(i / g.width) +
               ", " + std::to_string(i % g.width) + ")");
    }
  }
}

void validate_transmitters(const TransmitterSet& tx, int height, int width) {
  if (tx.positions.empty()) {
    fail(ErrorKind::validation, "transmitter set is empty");
  }
  std::set<Coord> seen;
  for (const Coord& p : tx.positions) {
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) {
      fail(ErrorKind::validation,
           "transmitter (" + std::to_string(p.row) + ", " +
               std::to_string(p.col) + ") outside " + std::to_string(height) +
               "x" + std::to_string(width) + " grid");
    }
    if (!seen.insert(p).second) {
      fail(ErrorKind::validation,
           "duplicate transmitter at (" + std::to_string(p.row) + ", " +
               std::to_string(p.col) + ")");
    }
  }
}

void validate_samples(const SparseSamples& s, int height, int width) {
  if (s.coords.size() != s.psd.size()) {
    fail(ErrorKind::validation,
         "sample coord/value count mismatch: " +
             std::to_string(s.coords.size()) + " vs " +
             std::to_string(s.psd.size()));
  }
  std::set<Coord> seen;
  for (std::size_t i = 0; i < s.coords.size(); ++i) {
    const Coord& p = s.coords[i];
    if (p.row < 0 || p.row >= height || p.col < 0 || p.col >= width) {
      fail(ErrorKind::validation,
           "sample " + std::to_string(i) + " at (" + std::to_string(p.row) +
               ", " + std::to_string(p.col) + ") outside " +
               std::to_string(height) + "x" + std::to_string(width) + " grid");
    }
    if (!seen.insert(p).second) {
      fail(ErrorKind::validation,
           "duplicate sample coordinate (" + std::to_string(p.row) + ", " +
               std::to_string(p.col) + ")");
    }
    if (!std::isfinite(s.psd[i])) {
      fail(ErrorKind::validation,
           "non-finite sample value at index " + std::to_string(i));
    }
  }
}

void validate_region(const RegionFeatures& region) {
  if (region.height <= 0 || region.width <= 0) {
    fail(ErrorKind::validation, "region: non-positive shape");
  }
  validate_binary(region.urban, "region.urban");
  if (region.urban.height != region.height ||
      region.urban.width != region.width) {
    fail(ErrorKind::validation, "region.urban shape differs from region shape");
  }
  validate_transmitters(region.transmitters, region.height, region.width);
  validate_samples(region.samples, region.height, region.width);
  if (region.ground_truth.has_value()) {
    validate_normalized(*region.ground_truth, "region.ground_truth");
    if (!region.ground_truth->same_shape(region.urban)) {
      fail(ErrorKind::validation,
           "region.ground_truth shape differs from region shape");
    }
  }
}

EncodedInput encode_input(const RegionFeatures& region, bool with_mask) {
  validate_region(region);
  EncodedInput enc;
  enc.observations = Grid::zeros(region.height, region.width);
  enc.urban = region.urban;
  enc.transmitters = Grid::zeros(region.height, region.width);
  for (int i = 0; i < region.samples.count(); ++i) {
    const Coord p = region.samples.coords[i];
    enc.observations.at(p.row, p.col) = region.samples.psd[i];
  }
  for (const Coord& p : region.transmitters.positions) {
    enc.transmitters.at(p.row, p.col) = 1.0;
  }
  if (with_mask) {
    Grid mask = Grid::zeros(region.height, region.width);
    for (const Coord& p : region.samples.coords) {
      mask.at(p.row, p.col) = 1.0;
    }
    enc.mask = std::move(mask);
  }
  return enc;
}

double normalize_db(double db, double dmin_db, double dmax_db) {
  if (!(dmax_db > dmin_db)) {
    fail(ErrorKind::parameter, "normalization window requires dmax > dmin");
  }
  const double v = (db - dmin_db) / (dmax_db - dmin_db);
  return std::clamp(v, 0.0, 1.0);
}

double denormalize_db(double v, double dmin_db, double dmax_db) {
  if (!(dmax_db > dmin_db)) {
    fail(ErrorKind::parameter, "normalization window requires dmax > dmin");
  }
  return dmin_db + v * (dmax_db - dmin_db);
}

Grid normalize_psd(const Grid& raw_db, double dmin_db, double dmax_db) {
  validate_grid(raw_db, "normalize_psd input");
  Grid out = raw_db;
  for (double& v : out.values) v = normalize_db(v, dmin_db, dmax_db);
  return out;
}

Grid denormalize_psd(const Grid& normalized, double dmin_db, double dmax_db) {
  validate_normalized(normalized, "denormalize_psd input");
  Grid out = normalized;
  for (double& v : out.values) v = denormalize_db(v, dmin_db, dmax_db);
  return out;
}

}  // namespace rmap
