// SPDX-License-Identifier: Apache-2.0
#include "rmap/tensor.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "rmap/error.hpp"

namespace rmap {

Tensor4::Tensor4(int n_, int c_, int h_, int w_) : n(n_), c(c_), h(h_), w(w_) {
  if (n_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0) {
    fail(ErrorKind::validation, "tensor dimensions must be positive");
  }
  v.assign(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0);
}

Tensor4 batch_from_inputs(const std::vector<EncodedInput>& inputs) {
  if (inputs.empty()) {
    fail(ErrorKind::validation, "empty input batch");
  }
  const int h = inputs.front().observations.height;
  const int w = inputs.front().observations.width;
  const int c = inputs.front().channel_count();
  Tensor4 t(static_cast<int>(inputs.size()), c, h, w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const EncodedInput& e = inputs[b];
    if (e.observations.height != h || e.observations.width != w ||
        e.channel_count() != c || !e.urban.same_shape(e.observations) ||
        !e.transmitters.same_shape(e.observations)) {
      fail(ErrorKind::validation, "input batch shapes differ");
    }
    std::memcpy(t.plane(static_cast<int>(b), 0), e.observations.values.data(),
                plane * sizeof(double));
    std::memcpy(t.plane(static_cast<int>(b), 1), e.urban.values.data(),
                plane * sizeof(double));
    std::memcpy(t.plane(static_cast<int>(b), 2), e.transmitters.values.data(),
                plane * sizeof(double));
    if (c == 4) {
      std::memcpy(t.plane(static_cast<int>(b), 3), e.mask->values.data(),
                  plane * sizeof(double));
    }
  }
  return t;
}

Tensor4 batch_from_grids(const std::vector<const Grid*>& grids) {
  if (grids.empty()) {
    fail(ErrorKind::validation, "empty grid batch");
  }
  const int h = grids.front()->height;
  const int w = grids.front()->width;
  Tensor4 t(static_cast<int>(grids.size()), 1, h, w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (std::size_t b = 0; b < grids.size(); ++b) {
    if (grids[b]->height != h || grids[b]->width != w) {
      fail(ErrorKind::validation, "grid batch shapes differ");
    }
    std::memcpy(t.plane(static_cast<int>(b), 0), grids[b]->values.data(),
                plane * sizeof(double));
  }
  return t;
}

Grid plane_to_grid(const Tensor4& t, int b, int ch) {
  if (b < 0 || b >= t.n || ch < 0 || ch >= t.c) {
    fail(ErrorKind::validation, "plane index out of range");
  }
  Grid g = Grid::zeros(t.h, t.w);
  std::memcpy(g.values.data(), t.plane(b, ch),
              static_cast<std::size_t>(t.h) * t.w * sizeof(double));
  return g;
}

void ensure_finite(const Tensor4& t, const char* context) {
  for (const double x : t.v) {
    if (!std::isfinite(x)) {
      fail(ErrorKind::numerical,
           std::string("non-finite value in ") + context);
    }
  }
}

}  // namespace rmap
