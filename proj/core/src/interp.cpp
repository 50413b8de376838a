// SPDX-License-Identifier: Apache-2.0
#include "rmap/interp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rmap/error.hpp"

namespace rmap {

namespace {

// Bounds-free sample validation for fitters that never see the grid shape.
void check_samples(const SparseSamples& s, int min_count, const char* what) {
  if (s.coords.size() != s.psd.size()) {
    fail(ErrorKind::validation,
         std::string(what) + ": coord/value count mismatch");
  }
  if (s.count() < min_count) {
    fail(ErrorKind::estimator, std::string(what) + ": needs at least " +
                                   std::to_string(min_count) +
                                   " samples, got " +
                                   std::to_string(s.count()));
  }
  std::set<Coord> seen;
  for (int i = 0; i < s.count(); ++i) {
    if (!seen.insert(s.coords[i]).second) {
      fail(ErrorKind::validation,
           std::string(what) + ": duplicate sample coordinate (" +
               std::to_string(s.coords[i].row) + ", " +
               std::to_string(s.coords[i].col) + ")");
    }
    if (!std::isfinite(s.psd[i])) {
      fail(ErrorKind::validation,
           std::string(what) + ": non-finite value at index " +
               std::to_string(i));
    }
  }
}

double dist(Coord a, Coord b) {
  return std::hypot(static_cast<double>(a.row - b.row),
                    static_cast<double>(a.col - b.col));
}

double kernel_value(RbfKernel kernel, double eps, double r) {
  switch (kernel) {
    case RbfKernel::gaussian: {
      const double t = eps * r;
      return std::exp(-t * t);
    }
    case RbfKernel::multiquadric: {
      const double t = eps * r;
      return std::sqrt(1.0 + t * t);
    }
    case RbfKernel::thin_plate:
      return r > 0.0 ? r * r * std::log(r) : 0.0;
  }
  fail(ErrorKind::parameter, "unknown rbf kernel");
}

}  // namespace

Grid idw_interpolate(const SparseSamples& samples, int height, int width,
                     double power) {
  validate_samples(samples, height, width);
  check_samples(samples, 1, "idw");
  if (!(power > 0.0)) {
    fail(ErrorKind::parameter, "idw power must be positive");
  }
  Grid out = Grid::zeros(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double num = 0.0;
      double den = 0.0;
      bool exact = false;
      for (int i = 0; i < samples.count(); ++i) {
        const double d = dist({r, c}, samples.coords[i]);
        if (d == 0.0) {
          out.at(r, c) = samples.psd[i];
          exact = true;
          break;
        }
        const double w = 1.0 / std::pow(d, power);
        num += w * samples.psd[i];
        den += w;
      }
      if (!exact) out.at(r, c) = num / den;
    }
  }
  return out;
}

RbfModel rbf_fit(const SparseSamples& samples, RbfKernel kernel, double eps,
                 double ridge) {
  check_samples(samples, 1, "rbf");
  if (kernel != RbfKernel::thin_plate && !(eps > 0.0)) {
    fail(ErrorKind::parameter, "rbf shape parameter must be positive");
  }
  if (ridge < 0.0) {
    fail(ErrorKind::parameter, "rbf ridge must be non-negative");
  }
  const int k = samples.count();
  Eigen::MatrixXd phi(k, k);
  Eigen::VectorXd y(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      phi(i, j) =
          kernel_value(kernel, eps, dist(samples.coords[i], samples.coords[j]));
    }
    phi(i, i) += ridge;
    y(i) = samples.psd[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) {
    fail(ErrorKind::numerical,
         "rbf collocation matrix is rank deficient (rank " +
             std::to_string(qr.rank()) + " of " + std::to_string(k) +
             "); increase ridge or change the kernel");
  }
  const Eigen::VectorXd w = qr.solve(y);
  if (!w.allFinite()) {
    fail(ErrorKind::numerical, "rbf solve produced non-finite weights");
  }
  RbfModel model;
  model.kernel = kernel;
  model.eps = eps;
  model.centers = samples;
  model.weights.assign(w.data(), w.data() + k);
  return model;
}

double rbf_eval(const RbfModel& model, Coord cell) {
  double acc = 0.0;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    acc += model.weights[i] *
           kernel_value(model.kernel, model.eps,
                        dist(cell, model.centers.coords[i]));
  }
  return acc;
}

Grid rbf_interpolate(const SparseSamples& samples, int height, int width,
                     RbfKernel kernel, double eps, double ridge) {
  validate_samples(samples, height, width);
  const RbfModel model = rbf_fit(samples, kernel, eps, ridge);
  Grid out = Grid::zeros(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      out.at(r, c) = rbf_eval(model, {r, c});
    }
  }
  return out;
}

double variogram_gamma(const VariogramModel& model, double dist) {
  if (dist <= 0.0) return 0.0;
  return model.nugget + model.sill * (1.0 - std::exp(-dist / model.range));
}

VariogramModel fit_variogram(const SparseSamples& samples, int n_bins) {
  check_samples(samples, 3, "variogram");
  if (n_bins < 1) {
    fail(ErrorKind::parameter, "variogram needs at least one bin");
  }
  const int k = samples.count();
  double max_dist = 0.0;
  std::vector<std::pair<double, double>> pairs;  // (distance, semivariance)
  pairs.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  double mean = 0.0;
  for (int i = 0; i < k; ++i) mean += samples.psd[i];
  mean /= k;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double d = dist(samples.coords[i], samples.coords[j]);
      const double dv = samples.psd[i] - samples.psd[j];
      pairs.emplace_back(d, 0.5 * dv * dv);
      max_dist = std::max(max_dist, d);
    }
  }

  VariogramModel model;
  model.mean_value = mean;

  double gamma_max = 0.0;
  for (const auto& [d, g] : pairs) gamma_max = std::max(gamma_max, g);
  if (gamma_max < 1e-24 || max_dist <= 0.0) {
    model.degenerate = true;
    model.nugget = 0.0;
    model.sill = 0.0;
    model.range = 1.0;
    return model;
  }

  // Binned empirical semivariogram over (0, max_dist / 2]; longer pairs
  // carry little structure and are dropped.
  const double lag_cap = max_dist / 2.0;
  std::vector<double> bin_d, bin_g;
  {
    std::vector<double> sum_g(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<int> count(static_cast<std::size_t>(n_bins), 0);
    for (const auto& [d, g] : pairs) {
      if (d > lag_cap || d <= 0.0) continue;
      int b = static_cast<int>(d / lag_cap * n_bins);
      b = std::clamp(b, 0, n_bins - 1);
      sum_g[b] += g;
      ++count[b];
    }
    for (int b = 0; b < n_bins; ++b) {
      if (count[b] > 0) {
        bin_d.push_back((b + 0.5) * lag_cap / n_bins);
        bin_g.push_back(sum_g[b] / count[b]);
      }
    }
  }
  if (bin_d.empty()) {
    model.degenerate = true;
    model.nugget = 0.0;
    model.sill = 0.0;
    model.range = 1.0;
    return model;
  }

  // Scan candidate ranges; nugget and sill by least squares against the
  // exponential basis for each.
  double best_sse = std::numeric_limits<double>::infinity();
  for (int ci = 0; ci < 24; ++ci) {
    const double range =
        lag_cap * std::pow(10.0, -1.7 + 1.7 * ci / 23.0);  // ~2% .. 100%
    double s_g = 0.0, s_y = 0.0, s_gg = 0.0, s_gy = 0.0;
    const double n = static_cast<double>(bin_d.size());
    for (std::size_t b = 0; b < bin_d.size(); ++b) {
      const double g = 1.0 - std::exp(-bin_d[b] / range);
      s_g += g;
      s_y += bin_g[b];
      s_gg += g * g;
      s_gy += g * bin_g[b];
    }
    const double det = n * s_gg - s_g * s_g;
    double nugget, sill;
    if (std::abs(det) < 1e-18) {
      nugget = 0.0;
      sill = s_gg > 0.0 ? s_gy / s_gg : 0.0;
    } else {
      nugget = (s_y * s_gg - s_g * s_gy) / det;
      sill = (n * s_gy - s_g * s_y) / det;
    }
    nugget = std::max(nugget, 0.0);
    sill = std::max(sill, 1e-12 * gamma_max);
    double sse = 0.0;
    for (std::size_t b = 0; b < bin_d.size(); ++b) {
      const double g = 1.0 - std::exp(-bin_d[b] / range);
      const double err = nugget + sill * g - bin_g[b];
      sse += err * err;
    }
    if (sse < best_sse) {
      best_sse = sse;
      model.nugget = nugget;
      model.sill = sill;
      model.range = range;
    }
  }
  return model;
}

KrigingWeights kriging_weights(const SparseSamples& samples,
                               const VariogramModel& model, Coord cell) {
  check_samples(samples, 1, "kriging");
  const int k = samples.count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j) {
        a(i, j) = variogram_gamma(model, dist(samples.coords[i],
                                              samples.coords[j]));
      }
    }
    a(i, k) = 1.0;
    a(k, i) = 1.0;
  }
  Eigen::VectorXd rhs(k + 1);
  for (int i = 0; i < k; ++i) {
    rhs(i) = variogram_gamma(model, dist(cell, samples.coords[i]));
  }
  rhs(k) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd x = lu.solve(rhs);
  if (!x.allFinite()) {
    fail(ErrorKind::numerical, "kriging system is singular");
  }
  KrigingWeights w;
  w.lambda.assign(x.data(), x.data() + k);
  w.mu = x(k);
  return w;
}

Grid kriging_interpolate(const SparseSamples& samples, int height, int width,
                         int n_bins) {
  validate_samples(samples, height, width);
  const VariogramModel model = fit_variogram(samples, n_bins);
  if (model.degenerate) {
    return Grid::constant(height, width, model.mean_value);
  }
  const int k = samples.count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, k + 1);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j) {
        a(i, j) = variogram_gamma(model, dist(samples.coords[i],
                                              samples.coords[j]));
      }
    }
    a(i, k) = 1.0;
    a(k, i) = 1.0;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);

  Grid out = Grid::zeros(height, width);
  Eigen::VectorXd rhs(k + 1);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int i = 0; i < k; ++i) {
        rhs(i) = variogram_gamma(model, dist({r, c}, samples.coords[i]));
      }
      rhs(k) = 1.0;
      const Eigen::VectorXd x = lu.solve(rhs);
      if (!x.allFinite()) {
        fail(ErrorKind::numerical, "kriging system is singular");
      }
      double est = 0.0;
      for (int i = 0; i < k; ++i) est += x(i) * samples.psd[i];
      out.at(r, c) = est;
    }
  }
  return out;
}

}  // namespace rmap
