// SPDX-License-Identifier: Apache-2.0
#include "rmap/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "rmap/error.hpp"
#include "rmap/grid_io.hpp"

namespace rmap {
namespace {

void check_pair(const Grid& truth, const Grid& estimate, const char* what) {
  validate_grid(truth, what);
  if (!truth.same_shape(estimate)) {
    fail(ErrorKind::validation, std::string(what) + ": shape mismatch");
  }
}

double squared_error(const Grid& truth, const Grid& estimate) {
  double sse = 0.0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    const double d = truth.values[i] - estimate.values[i];
    sse += d * d;
  }
  return sse;
}

}  // namespace

double nmse(const Grid& truth, const Grid& estimate) {
  check_pair(truth, estimate, "nmse");
  double ref = 0.0;
  for (const double y : truth.values) {
    ref += y * y;
  }
  if (ref == 0.0) {
    fail(ErrorKind::numerical, "nmse undefined for an all-zero reference");
  }
  return squared_error(truth, estimate) / ref;
}

double rmse(const Grid& truth, const Grid& estimate) {
  check_pair(truth, estimate, "rmse");
  return std::sqrt(squared_error(truth, estimate) /
                   static_cast<double>(truth.size()));
}

MaskedMetrics masked_metrics(const Grid& truth, const Grid& estimate,
                             const Grid& mask) {
  check_pair(truth, estimate, "masked_metrics");
  validate_binary(mask, "masked_metrics mask");
  if (!mask.same_shape(truth)) {
    fail(ErrorKind::validation, "masked_metrics: mask shape mismatch");
  }
  double sse = 0.0;
  double ref = 0.0;
  long long count = 0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    if (mask.values[i] == 0.0) continue;
    const double d = truth.values[i] - estimate.values[i];
    sse += d * d;
    ref += truth.values[i] * truth.values[i];
    ++count;
  }
  if (count == 0) {
    fail(ErrorKind::validation, "masked_metrics: empty mask");
  }
  if (ref == 0.0) {
    fail(ErrorKind::numerical,
         "masked nmse undefined: reference is zero on the mask");
  }
  MaskedMetrics out;
  out.nmse = sse / ref;
  out.rmse = std::sqrt(sse / static_cast<double>(count));
  return out;
}

Grid outage_map(const Grid& map, double threshold) {
  validate_grid(map, "outage_map");
  Grid out = Grid::zeros(map.height, map.width);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    out.values[i] = map.values[i] < threshold ? 1.0 : 0.0;
  }
  return out;
}

double outage_error(const Grid& truth, const Grid& estimate,
                    double threshold) {
  check_pair(truth, estimate, "outage_error");
  long long mismatched = 0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    const bool a = truth.values[i] < threshold;
    const bool b = estimate.values[i] < threshold;
    if (a != b) ++mismatched;
  }
  return static_cast<double>(mismatched) / static_cast<double>(truth.size());
}

std::vector<long long> histogram(const Grid& map, int n_bins) {
  validate_grid(map, "histogram");
  if (n_bins <= 0) {
    fail(ErrorKind::parameter, "histogram needs a positive bin count");
  }
  std::vector<long long> counts(static_cast<std::size_t>(n_bins), 0);
  for (const double v : map.values) {
    int bin = static_cast<int>(v * n_bins);
    if (bin < 0) bin = 0;
    if (bin >= n_bins) bin = n_bins - 1;
    ++counts[bin];
  }
  return counts;
}

namespace {

void append_region(EvalReport& report, const std::string& group,
                   const std::string& name, const Grid& truth,
                   const Grid& estimate, int hist_bins) {
  EvalRow row;
  row.group = group;
  row.region = name;
  row.nmse = nmse(truth, estimate);
  row.rmse = rmse(truth, estimate);
  row.outage_lo = outage_error(truth, estimate, report.threshold_lo);
  row.outage_hi = outage_error(truth, estimate, report.threshold_hi);
  report.rows.push_back(row);

  const std::vector<long long> ht = histogram(truth, hist_bins);
  const std::vector<long long> he = histogram(estimate, hist_bins);
  if (report.truth_histogram.empty()) {
    report.truth_histogram.assign(static_cast<std::size_t>(hist_bins), 0);
    report.estimate_histogram.assign(static_cast<std::size_t>(hist_bins), 0);
  }
  for (int b = 0; b < hist_bins; ++b) {
    report.truth_histogram[b] += ht[b];
    report.estimate_histogram[b] += he[b];
  }
}

void summarize_group(EvalReport& report, const std::string& group,
                     std::size_t first_row) {
  GroupSummary s;
  s.group = group;
  for (std::size_t i = first_row; i < report.rows.size(); ++i) {
    ++s.regions;
    s.mean_nmse += report.rows[i].nmse;
    s.mean_rmse += report.rows[i].rmse;
    s.mean_outage_lo += report.rows[i].outage_lo;
    s.mean_outage_hi += report.rows[i].outage_hi;
  }
  if (s.regions == 0) {
    fail(ErrorKind::validation, "evaluation group is empty: " + group);
  }
  s.mean_nmse /= s.regions;
  s.mean_rmse /= s.regions;
  s.mean_outage_lo /= s.regions;
  s.mean_outage_hi /= s.regions;
  report.groups.push_back(s);
}

constexpr int kHistogramBins = 50;

}  // namespace

EvalReport evaluate_pairs(const std::string& group,
                          const std::vector<std::string>& region_names,
                          const std::vector<const Grid*>& truths,
                          const std::vector<const Grid*>& estimates,
                          double threshold_lo, double threshold_hi) {
  if (truths.size() != estimates.size() ||
      truths.size() != region_names.size()) {
    fail(ErrorKind::validation, "evaluate_pairs: list sizes differ");
  }
  EvalReport report;
  report.threshold_lo = threshold_lo;
  report.threshold_hi = threshold_hi;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    append_region(report, group, region_names[i], *truths[i], *estimates[i],
                  kHistogramBins);
  }
  summarize_group(report, group, 0);
  return report;
}

EvalReport zero_shot_eval(const EstimatorFn& estimator,
                          const std::vector<EvalSetup>& setups,
                          double threshold_lo, double threshold_hi) {
  EvalReport report;
  report.threshold_lo = threshold_lo;
  report.threshold_hi = threshold_hi;
  for (const EvalSetup& setup : setups) {
    if (setup.regions.size() != setup.region_names.size()) {
      fail(ErrorKind::validation, "zero_shot_eval: list sizes differ");
    }
    const std::size_t first = report.rows.size();
    for (std::size_t i = 0; i < setup.regions.size(); ++i) {
      const RegionFeatures& region = *setup.regions[i];
      if (!region.ground_truth.has_value()) {
        fail(ErrorKind::validation,
             "zero_shot_eval: region without ground truth: " +
                 setup.region_names[i]);
      }
      const Grid estimate = estimator(region);
      append_region(report, setup.name, setup.region_names[i],
                    *region.ground_truth, estimate, kHistogramBins);
    }
    summarize_group(report, setup.name, first);
  }
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "group,region,metric,value\n";
  const auto emit = [&out](const std::string& group, const std::string& region,
                           const char* metric, double value) {
    out += group;
    out += ',';
    out += region;
    out += ',';
    out += metric;
    out += ',';
    out += format_double(value);
    out += '\n';
  };
  for (const EvalRow& r : report.rows) {
    emit(r.group, r.region, "nmse", r.nmse);
    emit(r.group, r.region, "rmse", r.rmse);
    emit(r.group, r.region, "outage_lo", r.outage_lo);
    emit(r.group, r.region, "outage_hi", r.outage_hi);
  }
  for (const GroupSummary& g : report.groups) {
    emit(g.group, "mean", "nmse", g.mean_nmse);
    emit(g.group, "mean", "rmse", g.mean_rmse);
    emit(g.group, "mean", "outage_lo", g.mean_outage_lo);
    emit(g.group, "mean", "outage_hi", g.mean_outage_hi);
  }
  return out;
}

std::string histogram_csv(const EvalReport& report) {
  std::string out = "bin,lo,hi,truth_count,estimate_count\n";
  const int n = static_cast<int>(report.truth_histogram.size());
  for (int b = 0; b < n; ++b) {
    out += std::to_string(b);
    out += ',';
    out += format_double(static_cast<double>(b) / n);
    out += ',';
    out += format_double(static_cast<double>(b + 1) / n);
    out += ',';
    out += std::to_string(report.truth_histogram[b]);
    out += ',';
    out += std::to_string(report.estimate_histogram[b]);
    out += '\n';
  }
  return out;
}

std::string report_text(const EvalReport& report) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %8s %12s %12s %14s %14s\n", "group",
                "regions", "nmse", "rmse", "outage_lo", "outage_hi");
  std::string out = line;
  std::snprintf(line, sizeof(line),
                "thresholds: lo = %.6f, hi = %.6f (normalized psd)\n",
                report.threshold_lo, report.threshold_hi);
  out += line;
  for (const GroupSummary& g : report.groups) {
    std::snprintf(line, sizeof(line), "%-16s %8d %12.6f %12.6f %14.6f %14.6f\n",
                  g.group.c_str(), g.regions, g.mean_nmse, g.mean_rmse,
                  g.mean_outage_lo, g.mean_outage_hi);
    out += line;
  }
  return out;
}

}  // namespace rmap
