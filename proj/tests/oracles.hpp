// SPDX-License-Identifier: Apache-2.0
// Reference implementations coded straight from the definitions, used to
// cross-check the library. Deliberately naive: dense Gaussian elimination,
// O(N^4) transforms, direct loops. None of them share code with the library
// beyond the public data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "rmap/grid.hpp"
#include "rmap/interp.hpp"
#include "rmap/sampling.hpp"
#include "rmap/tensor.hpp"

namespace oracle {

// Dense linear solve with partial pivoting; a is overwritten.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int r = k + 1; r < n; ++r) {
      if (std::fabs(a[r][k]) > std::fabs(a[pivot][k])) pivot = r;
    }
    std::swap(a[k], a[pivot]);
    std::swap(b[k], b[pivot]);
    for (int r = k + 1; r < n; ++r) {
      const double m = a[r][k] / a[k][k];
      for (int c = k; c < n; ++c) a[r][c] -= m * a[k][c];
      b[r] -= m * b[k];
    }
  }
  std::vector<double> x(b.size());
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

inline double dist(rmap::Coord a, rmap::Coord b) {
  const double dr = a.row - b.row;
  const double dc = a.col - b.col;
  return std::sqrt(dr * dr + dc * dc);
}

// Shepard weights 1/d^p; a sample cell takes the sample value.
inline rmap::Grid idw_reference(const rmap::SparseSamples& s, int h, int w,
                                double power) {
  rmap::Grid g = rmap::Grid::zeros(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const rmap::Coord cell{r, c};
      double num = 0.0;
      double den = 0.0;
      bool exact = false;
      for (int i = 0; i < s.count(); ++i) {
        const double d = dist(s.coords[i], cell);
        if (d == 0.0) {
          g.values[static_cast<std::size_t>(r) * w + c] = s.psd[i];
          exact = true;
          break;
        }
        const double wt = 1.0 / std::pow(d, power);
        num += wt * s.psd[i];
        den += wt;
      }
      if (!exact) g.values[static_cast<std::size_t>(r) * w + c] = num / den;
    }
  }
  return g;
}

inline double rbf_kernel_reference(rmap::RbfKernel k, double eps, double r) {
  switch (k) {
    case rmap::RbfKernel::gaussian:
      return std::exp(-(eps * r) * (eps * r));
    case rmap::RbfKernel::multiquadric:
      return std::sqrt(1.0 + (eps * r) * (eps * r));
    case rmap::RbfKernel::thin_plate:
      return r == 0.0 ? 0.0 : r * r * std::log(r);
  }
  return 0.0;
}

// Collocation system solved densely, surface evaluated directly.
inline rmap::Grid rbf_reference(const rmap::SparseSamples& s, int h, int w,
                                rmap::RbfKernel k, double eps, double ridge) {
  const int n = s.count();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a[i][j] = rbf_kernel_reference(k, eps, dist(s.coords[i], s.coords[j]));
      if (i == j) a[i][j] += ridge;
    }
  }
  const std::vector<double> wts = solve_dense(a, s.psd);
  rmap::Grid g = rmap::Grid::zeros(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) {
        v += wts[i] *
             rbf_kernel_reference(k, eps, dist(s.coords[i], {r, c}));
      }
      g.values[static_cast<std::size_t>(r) * w + c] = v;
    }
  }
  return g;
}

inline double variogram_reference(const rmap::VariogramModel& m, double d) {
  if (d <= 0.0) return 0.0;
  return m.nugget + m.sill * (1.0 - std::exp(-d / m.range));
}

// Ordinary kriging weights for one cell: K+1 equations, last one the
// unbiasedness constraint.
inline std::vector<double> kriging_weights_reference(
    const rmap::SparseSamples& s, const rmap::VariogramModel& m,
    rmap::Coord cell, double* mu_out) {
  const int n = s.count();
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
  std::vector<double> b(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a[i][j] = variogram_reference(m, dist(s.coords[i], s.coords[j]));
    }
    a[i][n] = 1.0;
    a[n][i] = 1.0;
    b[i] = variogram_reference(m, dist(s.coords[i], cell));
  }
  b[n] = 1.0;
  std::vector<double> x = solve_dense(a, b);
  if (mu_out != nullptr) *mu_out = x[static_cast<std::size_t>(n)];
  x.resize(static_cast<std::size_t>(n));
  return x;
}

inline rmap::Grid kriging_reference(const rmap::SparseSamples& s,
                                    const rmap::VariogramModel& m, int h,
                                    int w) {
  rmap::Grid g = rmap::Grid::zeros(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::vector<double> lambda =
          kriging_weights_reference(s, m, {r, c}, nullptr);
      double v = 0.0;
      for (int i = 0; i < s.count(); ++i) v += lambda[i] * s.psd[i];
      g.values[static_cast<std::size_t>(r) * w + c] = v;
    }
  }
  return g;
}

// Plain quadruple-loop DFT, X(u,v) = sum x(r,c) e^{-2 pi i (ur/H + vc/W)}.
inline std::vector<std::complex<double>> dft2_reference(const rmap::Grid& g) {
  const int h = g.height;
  const int w = g.width;
  std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * w);
  constexpr double kTau = 6.283185307179586476925286766559;
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const double ang =
              -kTau * (static_cast<double>(u) * r / h +
                       static_cast<double>(v) * c / w);
          acc += g.values[static_cast<std::size_t>(r) * w + c] *
                 std::complex<double>(std::cos(ang), std::sin(ang));
        }
      }
      out[static_cast<std::size_t>(u) * w + v] = acc;
    }
  }
  return out;
}

// Full sort of every bin by aliased radial frequency (descending), ties by
// ascending (u, v).
inline std::vector<std::pair<int, int>> freq_order_reference(int h, int w) {
  std::vector<std::pair<int, int>> bins;
  bins.reserve(static_cast<std::size_t>(h) * w);
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) bins.emplace_back(u, v);
  }
  const auto fold = [](int k, int n) { return std::min(k, n - k); };
  std::stable_sort(bins.begin(), bins.end(),
                   [&](const auto& a, const auto& b) {
                     const long long ra =
                         static_cast<long long>(fold(a.first, h)) *
                             fold(a.first, h) +
                         static_cast<long long>(fold(a.second, w)) *
                             fold(a.second, w);
                     const long long rb =
                         static_cast<long long>(fold(b.first, h)) *
                             fold(b.first, h) +
                         static_cast<long long>(fold(b.second, w)) *
                             fold(b.second, w);
                     if (ra != rb) return ra > rb;
                     return a < b;
                   });
  return bins;
}

// Per-label argmax by direct scan; labels emitted in ascending order.
inline rmap::SparseSamples downsample_reference(
    const rmap::SparseSamples& s, const rmap::SuperpixelLabels& labels) {
  rmap::SparseSamples out;
  for (int l = 0; l < labels.n_labels; ++l) {
    int best = -1;
    for (int i = 0; i < s.count(); ++i) {
      if (labels.label(s.coords[i].row, s.coords[i].col) != l) continue;
      if (best < 0 || s.psd[i] > s.psd[best] ||
          (s.psd[i] == s.psd[best] && s.coords[i] < s.coords[best])) {
        best = i;
      }
    }
    if (best >= 0) {
      out.coords.push_back(s.coords[best]);
      out.psd.push_back(s.psd[best]);
    }
  }
  return out;
}

// Bresenham walk, endpoints excluded, endpoints canonically ordered first.
inline int wall_count_reference(rmap::Coord a, rmap::Coord b,
                                const rmap::Grid& urban) {
  if (b < a) std::swap(a, b);
  int x0 = a.col, y0 = a.row;
  const int x1 = b.col, y1 = b.row;
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int count = 0;
  while (!(x0 == x1 && y0 == y1)) {
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
    if (x0 == x1 && y0 == y1) break;
    if (urban.values[static_cast<std::size_t>(y0) * urban.width + x0] != 0.0) {
      ++count;
    }
  }
  return count;
}

// Central finite difference of scalar_fn at x, all cells, step h.
inline rmap::Grid fd_gradient(
    const std::function<double(const rmap::Grid&)>& scalar_fn, rmap::Grid x,
    double h) {
  rmap::Grid g = rmap::Grid::zeros(x.height, x.width);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double keep = x.values[i];
    x.values[i] = keep + h;
    const double up = scalar_fn(x);
    x.values[i] = keep - h;
    const double dn = scalar_fn(x);
    x.values[i] = keep;
    g.values[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

// Largest elementwise deviation scaled by max(1, |a|, |b|).
inline double max_rel_err(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale =
        std::max({1.0, std::fabs(a[i]), std::fabs(b[i])});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
  }
  return worst;
}

// Upper 0.999 quantile of chi-square with 15 degrees of freedom, for the
// 16-bin uniformity check. Frozen so the test needs no quantile code.
inline constexpr double kChiSq999Df15 = 37.69729821835383;

// Direct strided cross-correlation with zero padding of (k-1)/2 leading,
// remainder trailing, written against the padded-coordinate definition.
inline rmap::Tensor4 conv_reference(const rmap::Tensor4& x,
                                    const std::vector<double>& w,
                                    const std::vector<double>& bias, int out_ch,
                                    int kh, int kw, int stride) {
  const int pt = (kh - 1) / 2;
  const int pl = (kw - 1) / 2;
  const int oh = (x.h - 1) / stride + 1;
  const int ow = (x.w - 1) / stride + 1;
  rmap::Tensor4 y(x.n, out_ch, oh, ow);
  for (int b = 0; b < x.n; ++b) {
    for (int oc = 0; oc < out_ch; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          double acc = bias[static_cast<std::size_t>(oc)];
          for (int ic = 0; ic < x.c; ++ic) {
            for (int ky = 0; ky < kh; ++ky) {
              for (int kx = 0; kx < kw; ++kx) {
                const int iy = oy * stride - pt + ky;
                const int ix = ox * stride - pl + kx;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                const double wv =
                    w[((static_cast<std::size_t>(oc) * x.c + ic) * kh + ky) *
                          kw +
                      kx];
                acc += wv * x.at(b, ic, iy, ix);
              }
            }
          }
          y.at(b, oc, oy, ox) = acc;
        }
      }
    }
  }
  return y;
}

}  // namespace oracle
