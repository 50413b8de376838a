// SPDX-License-Identifier: Apache-2.0
#include "rmap/dft.hpp"

#include <cmath>

#include "rmap/error.hpp"

namespace rmap {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// w[k] = exp(-2*pi*i*k/n), k in [0, n)
std::vector<std::complex<double>> twiddles(int n) {
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double phase = -kTwoPi * k / n;
    w[k] = {std::cos(phase), std::sin(phase)};
  }
  return w;
}

}  // namespace

std::vector<std::complex<double>> dft2(const Grid& g) {
  validate_grid(g, "dft2 input");
  const int h = g.height;
  const int w = g.width;
  const auto ww = twiddles(w);
  const auto wh = twiddles(h);

  // Row pass: R(r, v) = sum_c x(r, c) * ww[(v*c) mod w]
  std::vector<std::complex<double>> row_pass(g.size());
  for (int r = 0; r < h; ++r) {
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (int c = 0; c < w; ++c) {
        acc += g.at(r, c) *
               ww[static_cast<std::size_t>(v) * c % static_cast<std::size_t>(w)];
      }
      row_pass[static_cast<std::size_t>(r) * w + v] = acc;
    }
  }

  // Column pass: X(u, v) = sum_r R(r, v) * wh[(u*r) mod h]
  std::vector<std::complex<double>> out(g.size());
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (int r = 0; r < h; ++r) {
        acc += row_pass[static_cast<std::size_t>(r) * w + v] *
               wh[static_cast<std::size_t>(u) * r % static_cast<std::size_t>(h)];
      }
      out[static_cast<std::size_t>(u) * w + v] = acc;
    }
  }
  return out;
}

Grid dft2_adjoint(const std::vector<FreqBin>& bins,
                  const std::vector<std::complex<double>>& coeffs, int height,
                  int width) {
  if (bins.size() != coeffs.size()) {
    fail(ErrorKind::validation, "dft2_adjoint: bin/coefficient count mismatch");
  }
  Grid out = Grid::zeros(height, width);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const FreqBin b = bins[k];
    if (b.u < 0 || b.u >= height || b.v < 0 || b.v >= width) {
      fail(ErrorKind::validation,
           "dft2_adjoint: bin (" + std::to_string(b.u) + ", " +
               std::to_string(b.v) + ") outside " + std::to_string(height) +
               "x" + std::to_string(width));
    }
    const double re = coeffs[k].real();
    const double im = coeffs[k].imag();
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double phase =
            kTwoPi * (static_cast<double>(b.u) * r / height +
                      static_cast<double>(b.v) * c / width);
        out.at(r, c) += re * std::cos(phase) - im * std::sin(phase);
      }
    }
  }
  return out;
}

int folded_frequency(int k, int n) {
  const int m = ((k % n) + n) % n;
  return std::min(m, n - m);
}

}  // namespace rmap
