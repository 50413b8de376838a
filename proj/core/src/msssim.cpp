// SPDX-License-Identifier: Apache-2.0
#include "rmap/msssim.hpp"

#include <cmath>
#include <vector>

#include "rmap/error.hpp"

namespace rmap {

namespace {

constexpr int kWin = 11;
constexpr int kHalf = kWin / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (0.01 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

const double* gaussian_kernel() {
  static const std::vector<double> k = [] {
    std::vector<double> g(kWin * kWin);
    double sum = 0.0;
    for (int dr = -kHalf; dr <= kHalf; ++dr) {
      for (int dc = -kHalf; dc <= kHalf; ++dc) {
        const double v =
            std::exp(-(dr * dr + dc * dc) / (2.0 * kSigma * kSigma));
        g[(dr + kHalf) * kWin + (dc + kHalf)] = v;
        sum += v;
      }
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return k.data();
}

// Unnormalized window correlation, out-of-bounds taps skipped.
Grid corr(const Grid& x) {
  const double* g = gaussian_kernel();
  Grid out = Grid::zeros(x.height, x.width);
  for (int r = 0; r < x.height; ++r) {
    for (int c = 0; c < x.width; ++c) {
      double acc = 0.0;
      for (int dr = -kHalf; dr <= kHalf; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= x.height) continue;
        for (int dc = -kHalf; dc <= kHalf; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= x.width) continue;
          acc += g[(dr + kHalf) * kWin + (dc + kHalf)] * x.at(rr, cc);
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

Grid pool2(const Grid& x) {
  Grid out = Grid::zeros(std::max(1, x.height / 2), std::max(1, x.width / 2));
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      out.at(r, c) = 0.25 * (x.at(2 * r, 2 * c) + x.at(2 * r, 2 * c + 1) +
                             x.at(2 * r + 1, 2 * c) + x.at(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

// Adjoint of pool2 into a grid of the given (pre-pool) shape; the odd
// trailing row/column that forward pooling crops receives zero.
Grid unpool2(const Grid& t, int height, int width) {
  Grid out = Grid::zeros(height, width);
  for (int r = 0; r < t.height; ++r) {
    for (int c = 0; c < t.width; ++c) {
      const double v = 0.25 * t.at(r, c);
      out.at(2 * r, 2 * c) += v;
      out.at(2 * r, 2 * c + 1) += v;
      out.at(2 * r + 1, 2 * c) += v;
      out.at(2 * r + 1, 2 * c + 1) += v;
    }
  }
  return out;
}

struct LevelData {
  Grid u, v;
  Grid z;              // per-cell window normalizer
  Grid mu_u, mu_v;     // weighted means
  Grid cs;             // contrast-structure map
  Grid d;              // its denominator sigma_u^2 + sigma_v^2 + C2
  double mcs = 0.0;
  // Coarsest level only:
  Grid lum;
  Grid lum_d;
  double ml = 0.0;
};

LevelData level_stats(Grid u, Grid v, bool with_luminance) {
  LevelData lv;
  lv.z = corr(Grid::constant(u.height, u.width, 1.0));
  const Grid raw_mu_u = corr(u);
  const Grid raw_mu_v = corr(v);
  Grid uu = u, vv = v, uv = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu.values[i] = u.values[i] * u.values[i];
    vv.values[i] = v.values[i] * v.values[i];
    uv.values[i] = u.values[i] * v.values[i];
  }
  const Grid raw_uu = corr(uu);
  const Grid raw_vv = corr(vv);
  const Grid raw_uv = corr(uv);

  lv.mu_u = Grid::zeros(u.height, u.width);
  lv.mu_v = Grid::zeros(u.height, u.width);
  lv.cs = Grid::zeros(u.height, u.width);
  lv.d = Grid::zeros(u.height, u.width);
  if (with_luminance) {
    lv.lum = Grid::zeros(u.height, u.width);
    lv.lum_d = Grid::zeros(u.height, u.width);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double z = lv.z.values[i];
    const double mu = raw_mu_u.values[i] / z;
    const double mv = raw_mu_v.values[i] / z;
    const double su = raw_uu.values[i] / z - mu * mu;
    const double sv = raw_vv.values[i] / z - mv * mv;
    const double suv = raw_uv.values[i] / z - mu * mv;
    lv.mu_u.values[i] = mu;
    lv.mu_v.values[i] = mv;
    const double d = su + sv + kC2;
    lv.d.values[i] = d;
    lv.cs.values[i] = (2.0 * suv + kC2) / d;
    lv.mcs += lv.cs.values[i];
    if (with_luminance) {
      const double dl = mu * mu + mv * mv + kC1;
      lv.lum_d.values[i] = dl;
      lv.lum.values[i] = (2.0 * mu * mv + kC1) / dl;
      lv.ml += lv.lum.values[i];
    }
  }
  lv.mcs /= static_cast<double>(u.size());
  if (with_luminance) lv.ml /= static_cast<double>(u.size());
  lv.u = std::move(u);
  lv.v = std::move(v);
  return lv;
}

std::vector<LevelData> forward(const Grid& u, const Grid& v, int levels) {
  validate_grid(u, "ms_ssim u");
  validate_grid(v, "ms_ssim v");
  if (!u.same_shape(v)) {
    fail(ErrorKind::validation, "ms_ssim: shape mismatch");
  }
  if (levels < 1) {
    fail(ErrorKind::parameter, "ms_ssim: levels must be >= 1");
  }
  const int need = 8 << (levels - 1);
  if (std::min(u.height, u.width) < need) {
    fail(ErrorKind::parameter,
         "ms_ssim: grid " + std::to_string(u.height) + "x" +
             std::to_string(u.width) + " too small for " +
             std::to_string(levels) + " levels (needs min dim >= " +
             std::to_string(need) + ")");
  }
  std::vector<LevelData> lv;
  lv.reserve(static_cast<std::size_t>(levels));
  Grid cu = u, cv = v;
  for (int j = 0; j < levels; ++j) {
    const bool coarsest = (j == levels - 1);
    Grid nu, nv;
    if (!coarsest) {
      nu = pool2(cu);
      nv = pool2(cv);
    }
    lv.push_back(level_stats(std::move(cu), std::move(cv), coarsest));
    cu = std::move(nu);
    cv = std::move(nv);
  }
  return lv;
}

double combine(const std::vector<LevelData>& lv) {
  const double e = 1.0 / static_cast<double>(lv.size());
  double ms = 1.0;
  for (const LevelData& l : lv) {
    ms *= std::pow(std::max(l.mcs, 0.0), e);
  }
  ms *= std::pow(std::max(lv.back().ml, 0.0), e);
  return ms;
}

}  // namespace

double ms_ssim(const Grid& u, const Grid& v, int levels) {
  return combine(forward(u, v, levels));
}

LossTerm l_ssim(const Grid& estimate, const Grid& target, int levels) {
  const std::vector<LevelData> lv = forward(estimate, target, levels);
  const double ms = combine(lv);

  LossTerm out;
  out.value = 1.0 - ms;

  const double e = 1.0 / static_cast<double>(levels);
  // d(ms)/d(level mean); zero where the clamp is active (subgradient 0).
  std::vector<double> dms_dmcs(lv.size(), 0.0);
  double dms_dml = 0.0;
  if (ms > 0.0) {
    for (std::size_t j = 0; j < lv.size(); ++j) {
      dms_dmcs[j] = ms * e / lv[j].mcs;
    }
    dms_dml = ms * e / lv.back().ml;
  }

  // Per-level pixel gradient w.r.t. the estimate, then chain through the
  // pooling pyramid from coarsest to finest. dL/dms = -1.
  Grid acc;
  for (int j = static_cast<int>(lv.size()) - 1; j >= 0; --j) {
    const LevelData& l = lv[j];
    const std::size_t n = l.u.size();
    const double dmean = -dms_dmcs[j] / static_cast<double>(n);

    // Coefficients on the raw windowed stats m_uv, m_uu, mu_u.
    Grid coef_uv = Grid::zeros(l.u.height, l.u.width);
    Grid coef_uu = Grid::zeros(l.u.height, l.u.width);
    Grid coef_mu = Grid::zeros(l.u.height, l.u.width);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = l.d.values[i];
      const double cs = l.cs.values[i];
      const double mu = l.mu_u.values[i];
      const double mv = l.mu_v.values[i];
      const double dcs = dmean;  // d loss / d cs(i)
      coef_uv.values[i] = dcs * 2.0 / d;
      coef_uu.values[i] = dcs * (-cs / d);
      coef_mu.values[i] = dcs * (-2.0 * mv + 2.0 * cs * mu) / d;
    }
    if (j == static_cast<int>(lv.size()) - 1 && dms_dml != 0.0) {
      const double dl_mean = -dms_dml / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double mu = l.mu_u.values[i];
        const double mv = l.mu_v.values[i];
        const double lum = l.lum.values[i];
        const double dl = l.lum_d.values[i];
        coef_mu.values[i] += dl_mean * (2.0 * mv - 2.0 * lum * mu) / dl;
      }
    }

    // Adjoint of the renormalized window: correlate coef/z with the kernel.
    for (std::size_t i = 0; i < n; ++i) {
      const double z = l.z.values[i];
      coef_uv.values[i] /= z;
      coef_uu.values[i] /= z;
      coef_mu.values[i] /= z;
    }
    const Grid adj_uv = corr(coef_uv);
    const Grid adj_uu = corr(coef_uu);
    const Grid adj_mu = corr(coef_mu);

    Grid du = Grid::zeros(l.u.height, l.u.width);
    for (std::size_t i = 0; i < n; ++i) {
      du.values[i] = adj_uv.values[i] * l.v.values[i] +
                     adj_uu.values[i] * 2.0 * l.u.values[i] +
                     adj_mu.values[i];
    }

    if (acc.values.empty()) {
      acc = std::move(du);
    } else {
      Grid up = unpool2(acc, l.u.height, l.u.width);
      for (std::size_t i = 0; i < n; ++i) {
        up.values[i] += du.values[i];
      }
      acc = std::move(up);
    }
  }
  out.grad = std::move(acc);
  return out;
}

}  // namespace rmap
