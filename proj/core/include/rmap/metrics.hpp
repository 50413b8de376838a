// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rmap/grid.hpp"

namespace rmap {

// Whole-map error metrics. nmse = ||y - yhat||_F^2 / ||y||_F^2 and is
// undefined (ErrorKind::numerical) for an all-zero reference;
// rmse = sqrt(||y - yhat||_F^2 / (H*W)).
double nmse(const Grid& truth, const Grid& estimate);
double rmse(const Grid& truth, const Grid& estimate);

// Same metrics restricted to mask support (mask is binary; must select at
// least one cell, and masked nmse needs a nonzero masked reference).
struct MaskedMetrics {
  double nmse = 0.0;
  double rmse = 0.0;
};
MaskedMetrics masked_metrics(const Grid& truth, const Grid& estimate,
                             const Grid& mask);

// Binary map of cells whose value falls below the threshold.
Grid outage_map(const Grid& map, double threshold);

// Fraction of cells where the two outage maps disagree.
double outage_error(const Grid& truth, const Grid& estimate, double threshold);

// Report thresholds on the normalized scale (8-bit levels 5 and 25).
inline constexpr double kOutageThresholdLo = 5.0 / 255.0;
inline constexpr double kOutageThresholdHi = 25.0 / 255.0;

// Equal-width bins over [0, 1]; out-of-range values land in the edge bins so
// the counts always sum to H*W.
std::vector<long long> histogram(const Grid& map, int n_bins = 50);

// One evaluated region; group names the dataset/setup the region came from.
struct EvalRow {
  std::string group;
  std::string region;
  double nmse = 0.0;
  double rmse = 0.0;
  double outage_lo = 0.0;
  double outage_hi = 0.0;
};

struct GroupSummary {
  std::string group;
  int regions = 0;
  double mean_nmse = 0.0;
  double mean_rmse = 0.0;
  double mean_outage_lo = 0.0;
  double mean_outage_hi = 0.0;
};

struct EvalReport {
  double threshold_lo = kOutageThresholdLo;
  double threshold_hi = kOutageThresholdHi;
  std::vector<EvalRow> rows;
  std::vector<GroupSummary> groups;
  // Value distributions pooled over every evaluated region.
  std::vector<long long> truth_histogram;
  std::vector<long long> estimate_histogram;
};

// Scores precomputed estimate grids against their references as one group.
EvalReport evaluate_pairs(const std::string& group,
                          const std::vector<std::string>& region_names,
                          const std::vector<const Grid*>& truths,
                          const std::vector<const Grid*>& estimates,
                          double threshold_lo = kOutageThresholdLo,
                          double threshold_hi = kOutageThresholdHi);

// Runs one frozen estimator over several sampled test sets and reports every
// set as a group in a single report; no retraining happens between groups.
// Regions must carry ground truth.
using EstimatorFn = std::function<Grid(const RegionFeatures&)>;

struct EvalSetup {
  std::string name;
  std::vector<std::string> region_names;
  std::vector<const RegionFeatures*> regions;
};

EvalReport zero_shot_eval(const EstimatorFn& estimator,
                          const std::vector<EvalSetup>& setups,
                          double threshold_lo = kOutageThresholdLo,
                          double threshold_hi = kOutageThresholdHi);

// CSV: header group,region,metric,value; one row per region per metric,
// then one row per group per metric with region = "mean".
std::string report_csv(const EvalReport& report);

// CSV: header bin,lo,hi,truth_count,estimate_count.
std::string histogram_csv(const EvalReport& report);

// Fixed-width human-readable summary, one line per group.
std::string report_text(const EvalReport& report);

}  // namespace rmap
