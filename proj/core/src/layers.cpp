// SPDX-License-Identifier: Apache-2.0
#include "rmap/layers.hpp"

#include <cmath>
#include <cstring>
#include <utility>

#include "rmap/error.hpp"

namespace rmap {

void Param::resize(std::vector<int> dims) {
  shape = std::move(dims);
  std::size_t n = 1;
  for (const int d : shape) {
    if (d <= 0) {
      fail(ErrorKind::validation, "parameter dimension must be positive");
    }
    n *= static_cast<std::size_t>(d);
  }
  value.assign(n, 0.0);
  grad.assign(n, 0.0);
}

void Param::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

namespace {

// Zero-padded copy with (k-1)/2 leading rows/cols; total pad is k-1 per axis,
// so every kernel tap stays in bounds for output extent ceil(in / stride).
Tensor4 pad_input(const Tensor4& x, int kh, int kw) {
  const int pt = (kh - 1) / 2;
  const int pl = (kw - 1) / 2;
  Tensor4 p(x.n, x.c, x.h + kh - 1, x.w + kw - 1);
  for (int b = 0; b < x.n; ++b) {
    for (int ch = 0; ch < x.c; ++ch) {
      const double* src = x.plane(b, ch);
      double* dst = p.plane(b, ch);
      for (int y = 0; y < x.h; ++y) {
        std::memcpy(dst + static_cast<std::size_t>(y + pt) * p.w + pl,
                    src + static_cast<std::size_t>(y) * x.w,
                    static_cast<std::size_t>(x.w) * sizeof(double));
      }
    }
  }
  return p;
}

}  // namespace

Conv2d::Conv2d(std::string name, Conv2dSpec spec) : spec_(spec) {
  if (spec.in_ch <= 0 || spec.out_ch <= 0 || spec.kh <= 0 || spec.kw <= 0 ||
      spec.stride <= 0) {
    fail(ErrorKind::validation, "conv spec fields must be positive: " + name);
  }
  weight_.name = name + ".w";
  bias_.name = name + ".b";
  weight_.resize({spec.out_ch, spec.in_ch, spec.kh, spec.kw});
  bias_.resize({spec.out_ch});
}

void Conv2d::init(Rng& rng) {
  const double fan_in =
      static_cast<double>(spec_.in_ch) * spec_.kh * spec_.kw;
  const double limit = std::sqrt(6.0 / fan_in);
  for (double& w : weight_.value) {
    w = rng.uniform(-limit, limit);
  }
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
}

Tensor4 Conv2d::forward(const Tensor4& x) const {
  if (x.c != spec_.in_ch) {
    fail(ErrorKind::validation, "conv input channels mismatch: " + weight_.name);
  }
  const int s = spec_.stride;
  const int kh = spec_.kh;
  const int kw = spec_.kw;
  const int oh = out_extent(x.h, s);
  const int ow = out_extent(x.w, s);
  const Tensor4 xp = pad_input(x, kh, kw);
  Tensor4 y(x.n, spec_.out_ch, oh, ow);
  for (int b = 0; b < x.n; ++b) {
    for (int oc = 0; oc < spec_.out_ch; ++oc) {
      double* yp = y.plane(b, oc);
      const double bv = bias_.value[oc];
      for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) {
        yp[i] = bv;
      }
      for (int ic = 0; ic < spec_.in_ch; ++ic) {
        const double* xc = xp.plane(b, ic);
        const double* wc =
            weight_.value.data() +
            (static_cast<std::size_t>(oc) * spec_.in_ch + ic) * kh * kw;
        for (int oy = 0; oy < oh; ++oy) {
          double* yrow = yp + static_cast<std::size_t>(oy) * ow;
          const double* xbase =
              xc + static_cast<std::size_t>(oy) * s * xp.w;
          for (int ky = 0; ky < kh; ++ky) {
            const double* xrow = xbase + static_cast<std::size_t>(ky) * xp.w;
            const double* wrow = wc + static_cast<std::size_t>(ky) * kw;
            for (int kx = 0; kx < kw; ++kx) {
              const double wv = wrow[kx];
              const double* xs = xrow + kx;
              if (s == 1) {
                for (int ox = 0; ox < ow; ++ox) {
                  yrow[ox] += wv * xs[ox];
                }
              } else {
                for (int ox = 0; ox < ow; ++ox) {
                  yrow[ox] += wv * xs[static_cast<std::size_t>(ox) * s];
                }
              }
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor4 Conv2d::backward(const Tensor4& x, const Tensor4& dy) {
  const int s = spec_.stride;
  const int kh = spec_.kh;
  const int kw = spec_.kw;
  const int oh = out_extent(x.h, s);
  const int ow = out_extent(x.w, s);
  if (x.c != spec_.in_ch || dy.n != x.n || dy.c != spec_.out_ch ||
      dy.h != oh || dy.w != ow) {
    fail(ErrorKind::validation, "conv backward shape mismatch: " + weight_.name);
  }
  const Tensor4 xp = pad_input(x, kh, kw);
  Tensor4 dxp(x.n, x.c, xp.h, xp.w);

  for (int oc = 0; oc < spec_.out_ch; ++oc) {
    double acc = 0.0;
    for (int b = 0; b < x.n; ++b) {
      const double* dyp = dy.plane(b, oc);
      for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) {
        acc += dyp[i];
      }
    }
    bias_.grad[oc] += acc;
  }

  for (int b = 0; b < x.n; ++b) {
    for (int oc = 0; oc < spec_.out_ch; ++oc) {
      const double* dyp = dy.plane(b, oc);
      for (int ic = 0; ic < spec_.in_ch; ++ic) {
        const double* xc = xp.plane(b, ic);
        double* dxc = dxp.plane(b, ic);
        const std::size_t wbase =
            (static_cast<std::size_t>(oc) * spec_.in_ch + ic) * kh * kw;
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const std::size_t widx =
                wbase + static_cast<std::size_t>(ky) * kw + kx;
            const double wv = weight_.value[widx];
            double acc = 0.0;
            for (int oy = 0; oy < oh; ++oy) {
              const double* dyrow = dyp + static_cast<std::size_t>(oy) * ow;
              const std::size_t off =
                  (static_cast<std::size_t>(oy) * s + ky) * xp.w + kx;
              const double* xrow = xc + off;
              double* dxrow = dxc + off;
              if (s == 1) {
                for (int ox = 0; ox < ow; ++ox) {
                  const double d = dyrow[ox];
                  acc += d * xrow[ox];
                  dxrow[ox] += wv * d;
                }
              } else {
                for (int ox = 0; ox < ow; ++ox) {
                  const double d = dyrow[ox];
                  const std::size_t xi = static_cast<std::size_t>(ox) * s;
                  acc += d * xrow[xi];
                  dxrow[xi] += wv * d;
                }
              }
            }
            weight_.grad[widx] += acc;
          }
        }
      }
    }
  }

  const int pt = (kh - 1) / 2;
  const int pl = (kw - 1) / 2;
  Tensor4 dx(x.n, x.c, x.h, x.w);
  for (int b = 0; b < x.n; ++b) {
    for (int ic = 0; ic < x.c; ++ic) {
      const double* src = dxp.plane(b, ic);
      double* dst = dx.plane(b, ic);
      for (int y = 0; y < x.h; ++y) {
        std::memcpy(dst + static_cast<std::size_t>(y) * x.w,
                    src + static_cast<std::size_t>(y + pt) * dxp.w + pl,
                    static_cast<std::size_t>(x.w) * sizeof(double));
      }
    }
  }
  return dx;
}

Tensor4 leaky_relu(const Tensor4& x, double slope) {
  Tensor4 y = x;
  for (double& v : y.v) {
    if (v < 0.0) v *= slope;
  }
  return y;
}

Tensor4 leaky_relu_backward(const Tensor4& x, const Tensor4& dy, double slope) {
  if (!x.same_shape(dy)) {
    fail(ErrorKind::validation, "leaky_relu backward shape mismatch");
  }
  Tensor4 dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    if (x.v[i] < 0.0) dx.v[i] *= slope;
  }
  return dx;
}

Tensor4 sigmoid(const Tensor4& x) {
  Tensor4 y = x;
  for (double& v : y.v) {
    v = 1.0 / (1.0 + std::exp(-v));
  }
  return y;
}

Tensor4 sigmoid_backward(const Tensor4& y, const Tensor4& dy) {
  if (!y.same_shape(dy)) {
    fail(ErrorKind::validation, "sigmoid backward shape mismatch");
  }
  Tensor4 dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    dx.v[i] *= y.v[i] * (1.0 - y.v[i]);
  }
  return dx;
}

Tensor4 upsample2(const Tensor4& x) {
  Tensor4 y(x.n, x.c, x.h * 2, x.w * 2);
  for (int b = 0; b < x.n; ++b) {
    for (int ch = 0; ch < x.c; ++ch) {
      const double* xc = x.plane(b, ch);
      double* yc = y.plane(b, ch);
      for (int i = 0; i < x.h; ++i) {
        for (int j = 0; j < x.w; ++j) {
          const double v = xc[static_cast<std::size_t>(i) * x.w + j];
          double* r0 = yc + static_cast<std::size_t>(2 * i) * y.w + 2 * j;
          r0[0] = v;
          r0[1] = v;
          r0[y.w] = v;
          r0[y.w + 1] = v;
        }
      }
    }
  }
  return y;
}

Tensor4 upsample2_backward(const Tensor4& dy) {
  if (dy.h % 2 != 0 || dy.w % 2 != 0) {
    fail(ErrorKind::validation, "upsample2 backward needs even dims");
  }
  Tensor4 dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
  for (int b = 0; b < dy.n; ++b) {
    for (int ch = 0; ch < dy.c; ++ch) {
      const double* dyc = dy.plane(b, ch);
      double* dxc = dx.plane(b, ch);
      for (int i = 0; i < dx.h; ++i) {
        for (int j = 0; j < dx.w; ++j) {
          const double* r0 =
              dyc + static_cast<std::size_t>(2 * i) * dy.w + 2 * j;
          dxc[static_cast<std::size_t>(i) * dx.w + j] =
              r0[0] + r0[1] + r0[dy.w] + r0[dy.w + 1];
        }
      }
    }
  }
  return dx;
}

Tensor4 global_avg_pool(const Tensor4& x) {
  Tensor4 y(x.n, x.c, 1, 1);
  const double inv = 1.0 / (static_cast<double>(x.h) * x.w);
  for (int b = 0; b < x.n; ++b) {
    for (int ch = 0; ch < x.c; ++ch) {
      const double* xc = x.plane(b, ch);
      double acc = 0.0;
      for (std::size_t i = 0; i < static_cast<std::size_t>(x.h) * x.w; ++i) {
        acc += xc[i];
      }
      y.at(b, ch, 0, 0) = acc * inv;
    }
  }
  return y;
}

Tensor4 global_avg_pool_backward(const Tensor4& dy, int h, int w) {
  if (dy.h != 1 || dy.w != 1) {
    fail(ErrorKind::validation, "pool backward expects (n, c, 1, 1)");
  }
  Tensor4 dx(dy.n, dy.c, h, w);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  for (int b = 0; b < dy.n; ++b) {
    for (int ch = 0; ch < dy.c; ++ch) {
      const double v = dy.at(b, ch, 0, 0) * inv;
      double* dxc = dx.plane(b, ch);
      for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) {
        dxc[i] = v;
      }
    }
  }
  return dx;
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    fail(ErrorKind::validation, "concat shape mismatch");
  }
  Tensor4 y(a.n, a.c + b.c, a.h, a.w);
  const std::size_t plane = static_cast<std::size_t>(a.h) * a.w;
  for (int n = 0; n < a.n; ++n) {
    for (int ch = 0; ch < a.c; ++ch) {
      std::memcpy(y.plane(n, ch), a.plane(n, ch), plane * sizeof(double));
    }
    for (int ch = 0; ch < b.c; ++ch) {
      std::memcpy(y.plane(n, a.c + ch), b.plane(n, ch),
                  plane * sizeof(double));
    }
  }
  return y;
}

void split_channels(const Tensor4& dy, int c_a, Tensor4& da, Tensor4& db) {
  if (c_a <= 0 || c_a >= dy.c) {
    fail(ErrorKind::validation, "split channel count out of range");
  }
  da = Tensor4(dy.n, c_a, dy.h, dy.w);
  db = Tensor4(dy.n, dy.c - c_a, dy.h, dy.w);
  const std::size_t plane = static_cast<std::size_t>(dy.h) * dy.w;
  for (int n = 0; n < dy.n; ++n) {
    for (int ch = 0; ch < c_a; ++ch) {
      std::memcpy(da.plane(n, ch), dy.plane(n, ch), plane * sizeof(double));
    }
    for (int ch = 0; ch < db.c; ++ch) {
      std::memcpy(db.plane(n, ch), dy.plane(n, c_a + ch),
                  plane * sizeof(double));
    }
  }
}

}  // namespace rmap
