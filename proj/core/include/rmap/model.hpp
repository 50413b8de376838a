// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmap/layers.hpp"
#include "rmap/rng.hpp"
#include "rmap/tensor.hpp"

namespace rmap {

// Networks are flat programs over a running tensor plus save/concat slots.
// `norm` is an identity placeholder holding the position where a
// normalization layer would sit, so op indices stay stable if one is added.
enum class OpKind { conv, leaky, sigmoid, up2, gap, save, concat, norm };

struct OpSpec {
  OpKind kind = OpKind::norm;
  int conv = -1;   // index into the conv list for OpKind::conv
  int slot = -1;   // slot id for save/concat
  double slope = 0.2;
};

// Forward activations recorded for the backward pass. `in[i]` is the input
// tensor of op i; `out[i]` is kept only where backward needs the output.
struct NetTape {
  std::vector<Tensor4> in;
  std::vector<Tensor4> out;
  Tensor4 output;
};

class OpNet {
 public:
  int add_conv(const std::string& name, Conv2dSpec spec);
  void push(OpSpec op);
  int new_slot();

  void init(Rng& rng);
  Tensor4 forward(const Tensor4& x, NetTape* tape = nullptr) const;

  // Accumulates parameter gradients and returns the input gradient.
  Tensor4 backward(const NetTape& tape, const Tensor4& d_output);

  std::vector<Param*> params();
  void zero_grad();

 private:
  std::vector<OpSpec> ops_;
  std::vector<Conv2d> convs_;
  int slot_count_ = 0;
};

// preset "compact": depth/base_channels scale a small skip-connected
// encoder-decoder (3x3 convs, stride-2 downsampling, nearest-up decoding).
// preset "full256": the fixed full-scale network; depth/base are ignored.
struct GeneratorConfig {
  std::string preset = "compact";
  int depth = 3;
  int base_channels = 16;
  int in_channels = 3;
};

class Generator {
 public:
  explicit Generator(const GeneratorConfig& cfg);

  void init(Rng& rng);

  // x is (n, in_channels, h, w) with h, w divisible by spatial_divisor().
  // Output is (n, 1, h, w) squashed into [0, 1].
  Tensor4 forward(const Tensor4& x, NetTape* tape = nullptr) const;
  Tensor4 backward(const NetTape& tape, const Tensor4& d_output);

  std::vector<Param*> params();
  void zero_grad();
  const GeneratorConfig& config() const { return cfg_; }
  int spatial_divisor() const { return divisor_; }

 private:
  GeneratorConfig cfg_;
  int divisor_ = 1;
  OpNet net_;
};

// Four stride-2 conv blocks, global average pooling, affine head, logistic
// output: one probability per batch item, strictly inside (0, 1).
struct DiscriminatorConfig {
  int in_channels = 3;
  int base_channels = 16;
  int conv_layers = 4;
  double slope = 0.2;
};

class Discriminator {
 public:
  explicit Discriminator(const DiscriminatorConfig& cfg);

  void init(Rng& rng);
  Tensor4 forward(const Tensor4& x, NetTape* tape = nullptr) const;
  Tensor4 backward(const NetTape& tape, const Tensor4& d_output);

  std::vector<Param*> params();
  void zero_grad();
  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  DiscriminatorConfig cfg_;
  OpNet net_;
};

// Collapses an (n, 1, 1, 1) score tensor to per-item values.
std::vector<double> flatten_scores(const Tensor4& t);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second-moment adaptive steps with bias correction. Grads are read
// from the bound params; callers zero them between steps.
class Adam {
 public:
  Adam(AdamConfig cfg, std::vector<Param*> params);

  void step();
  void zero_grad();

  const AdamConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }
  void set_steps(std::uint64_t t) { t_ = t; }
  const std::vector<Param*>& bound_params() const { return params_; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::vector<Param*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t t_ = 0;
};

}  // namespace rmap
