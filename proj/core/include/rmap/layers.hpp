// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "rmap/rng.hpp"
#include "rmap/tensor.hpp"

namespace rmap {

// One named trainable buffer. `grad` always mirrors `value` in size and is
// accumulated into by the backward passes; optimizers consume and clear it.
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;

  void resize(std::vector<int> dims);
  std::size_t count() const { return value.size(); }
  void zero_grad();
};

// 2-D cross-correlation with zero padding chosen so that the output extent is
// ceil(in / stride) regardless of kernel size. Even kernels pad one cell more
// on the bottom/right side, matching the floor((k-1)/2) leading pad.
struct Conv2dSpec {
  int in_ch = 0;
  int out_ch = 0;
  int kh = 0;
  int kw = 0;
  int stride = 1;
};

class Conv2d {
 public:
  Conv2d(std::string name, Conv2dSpec spec);

  // Uniform init on +-sqrt(6 / fan_in), biases zero. Consumes exactly
  // weight.count() draws so parameter streams stay aligned across runs.
  void init(Rng& rng);

  Tensor4 forward(const Tensor4& x) const;

  // Accumulates into weight/bias grads and returns the input gradient.
  // `x` must be the tensor given to the matching forward call.
  Tensor4 backward(const Tensor4& x, const Tensor4& dy);

  static int out_extent(int in, int stride) { return (in - 1) / stride + 1; }

  const Conv2dSpec& spec() const { return spec_; }
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  Conv2dSpec spec_;
  Param weight_;  // (out_ch, in_ch, kh, kw)
  Param bias_;    // (out_ch)
};

// Elementwise max(x, slope * x). Backward takes the forward input.
Tensor4 leaky_relu(const Tensor4& x, double slope);
Tensor4 leaky_relu_backward(const Tensor4& x, const Tensor4& dy, double slope);

// Logistic squashing. Backward takes the forward *output*.
Tensor4 sigmoid(const Tensor4& x);
Tensor4 sigmoid_backward(const Tensor4& y, const Tensor4& dy);

// Nearest-neighbor 2x upsampling; backward sums each 2x2 block.
Tensor4 upsample2(const Tensor4& x);
Tensor4 upsample2_backward(const Tensor4& dy);

// Spatial mean per (batch, channel) -> (n, c, 1, 1); backward spreads evenly.
Tensor4 global_avg_pool(const Tensor4& x);
Tensor4 global_avg_pool_backward(const Tensor4& dy, int h, int w);

// Channel concatenation [a | b]; split reverses it given a's channel count.
Tensor4 concat_channels(const Tensor4& a, const Tensor4& b);
void split_channels(const Tensor4& dy, int c_a, Tensor4& da, Tensor4& db);

}  // namespace rmap
