// SPDX-License-Identifier: Apache-2.0
#include "rmap/ldpl.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>

#include "rmap/error.hpp"
#include "rmap/grid_io.hpp"

namespace rmap {

namespace {

constexpr double kRidgeLambda = 1e-8;

double clamped_distance(Coord a, Coord b) {
  return std::max(std::hypot(static_cast<double>(a.row - b.row),
                             static_cast<double>(a.col - b.col)),
                  kDistanceFloorCells);
}

void check_params(const LdplParams& params, const TransmitterSet& tx) {
  if (params.alpha.size() != params.theta.size()) {
    fail(ErrorKind::validation, "ldpl params: alpha/theta count mismatch");
  }
  if (params.n_tx() != tx.count()) {
    fail(ErrorKind::validation,
         "ldpl params: " + std::to_string(params.n_tx()) +
             " parameter pairs for " + std::to_string(tx.count()) +
             " transmitters");
  }
  if (params.n_tx() == 0) {
    fail(ErrorKind::validation, "ldpl params: empty parameter set");
  }
}

}  // namespace

double ldpl_predict(const LdplParams& params, const TransmitterSet& tx,
                    Coord cell, TxAggregate agg) {
  check_params(params, tx);
  if (agg == TxAggregate::db_sum) {
    double sum = 0.0;
    for (int k = 0; k < params.n_tx(); ++k) {
      const double d = clamped_distance(cell, tx.positions[k]);
      sum += params.alpha[k] - 10.0 * params.theta[k] * std::log10(d);
    }
    return sum;
  }
  double linear = 0.0;
  for (int k = 0; k < params.n_tx(); ++k) {
    const double d = clamped_distance(cell, tx.positions[k]);
    const double term =
        params.alpha[k] - 10.0 * params.theta[k] * std::log10(d);
    linear += std::pow(10.0, term / 10.0);
  }
  return 10.0 * std::log10(linear);
}

LdplFit fit_ldpl(const SparseSamples& samples, const TransmitterSet& tx,
                 int height, int width) {
  validate_samples(samples, height, width);
  validate_transmitters(tx, height, width);
  const int k_samples = samples.count();
  const int n_tx = tx.count();
  const int n_unknowns = 2 * n_tx;

  if (k_samples < n_tx + 1) {
    fail(ErrorKind::underdetermined,
         "fit needs at least " + std::to_string(n_tx + 1) + " samples for " +
             std::to_string(n_tx) + " transmitters, got " +
             std::to_string(k_samples));
  }

  // Merged design: one shared intercept plus one log-distance column per
  // transmitter. Rank deficiency here means no amount of regularization can
  // separate alpha from theta.
  Eigen::MatrixXd merged(k_samples, 1 + n_tx);
  Eigen::MatrixXd full(k_samples, n_unknowns);
  Eigen::VectorXd y(k_samples);
  for (int j = 0; j < k_samples; ++j) {
    merged(j, 0) = 1.0;
    for (int k = 0; k < n_tx; ++k) {
      const double d = clamped_distance(samples.coords[j], tx.positions[k]);
      const double col = -10.0 * std::log10(d);
      merged(j, 1 + k) = col;
      full(j, k) = 1.0;           // alpha_k coefficient
      full(j, n_tx + k) = col;    // theta_k coefficient
    }
    y(j) = samples.psd[j];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> merged_qr(merged);
  merged_qr.setThreshold(1e-10);
  if (merged_qr.rank() < 1 + n_tx) {
    fail(ErrorKind::underdetermined,
         "intercept and decay are not separable from these samples (design "
         "rank " +
             std::to_string(merged_qr.rank()) + " of " +
             std::to_string(1 + n_tx) + ")");
  }

  LdplFit fit;
  Eigen::VectorXd x;
  if (n_tx == 1) {
    x = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(full).solve(y);
  } else {
    // Per-transmitter intercept columns are identical, so the full system is
    // always rank deficient; the ridge picks the minimum-norm solution.
    const Eigen::MatrixXd gram =
        full.transpose() * full +
        kRidgeLambda *
            Eigen::MatrixXd::Identity(n_unknowns, n_unknowns);
    x = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(full.transpose() * y);
    fit.ridge_used = true;
  }
  if (!x.allFinite()) {
    fail(ErrorKind::numerical, "ldpl fit produced non-finite parameters");
  }

  fit.params.alpha.assign(x.data(), x.data() + n_tx);
  fit.params.theta.assign(x.data() + n_tx, x.data() + n_unknowns);
  fit.residual_norm = (full * x - y).norm();
  return fit;
}

Grid upsample_template(const LdplParams& params, const TransmitterSet& tx,
                       int height, int width, TxAggregate agg) {
  check_params(params, tx);
  validate_transmitters(tx, height, width);
  Grid out = Grid::zeros(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      out.at(r, c) = ldpl_predict(params, tx, {r, c}, agg);
    }
  }
  return out;
}

void write_params_csv(const LdplParams& params,
                      const std::filesystem::path& path) {
  if (params.alpha.size() != params.theta.size()) {
    fail(ErrorKind::validation, "ldpl params: alpha/theta count mismatch");
  }
  std::string out = "k,alpha,theta\n";
  for (int k = 0; k < params.n_tx(); ++k) {
    out += std::to_string(k) + "," + format_double(params.alpha[k]) + "," +
           format_double(params.theta[k]) + "\n";
  }
  write_file_bytes(path, out);
}

LdplParams read_params_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty() ||
      rows[0] != std::vector<std::string>{"k", "alpha", "theta"}) {
    fail(ErrorKind::format,
         path.string() + ": expected header k,alpha,theta");
  }
  LdplParams params;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) {
      fail(ErrorKind::format, path.string() + ": row " + std::to_string(r) +
                                  " needs 3 fields");
    }
    const auto parse = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() ||
          !std::isfinite(v)) {
        fail(ErrorKind::format,
             path.string() + ": bad decimal \"" + s + "\" in row " +
                 std::to_string(r));
      }
      return v;
    };
    long k = 0;
    const auto res = std::from_chars(
        rows[r][0].data(), rows[r][0].data() + rows[r][0].size(), k);
    if (res.ec != std::errc() || k != static_cast<long>(r) - 1) {
      fail(ErrorKind::format, path.string() + ": row " + std::to_string(r) +
                                  " has out-of-order transmitter index");
    }
    params.alpha.push_back(parse(rows[r][1]));
    params.theta.push_back(parse(rows[r][2]));
  }
  if (params.alpha.empty()) {
    fail(ErrorKind::format, path.string() + ": no parameter rows");
  }
  return params;
}

}  // namespace rmap
