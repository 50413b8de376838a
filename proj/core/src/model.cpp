// SPDX-License-Identifier: Apache-2.0
#include "rmap/model.hpp"

#include <cmath>
#include <utility>

#include "rmap/error.hpp"

namespace rmap {
namespace {

void add_into(Tensor4& dst, const Tensor4& src) {
  if (!dst.same_shape(src)) {
    fail(ErrorKind::validation, "gradient accumulation shape mismatch");
  }
  for (std::size_t i = 0; i < dst.v.size(); ++i) {
    dst.v[i] += src.v[i];
  }
}

}  // namespace

int OpNet::add_conv(const std::string& name, Conv2dSpec spec) {
  convs_.emplace_back(name, spec);
  const int idx = static_cast<int>(convs_.size()) - 1;
  push({OpKind::conv, idx, -1, 0.0});
  return idx;
}

void OpNet::push(OpSpec op) { ops_.push_back(op); }

int OpNet::new_slot() { return slot_count_++; }

void OpNet::init(Rng& rng) {
  for (Conv2d& c : convs_) {
    c.init(rng);
  }
}

Tensor4 OpNet::forward(const Tensor4& x, NetTape* tape) const {
  std::vector<Tensor4> slots(static_cast<std::size_t>(slot_count_));
  Tensor4 cur = x;
  if (tape) {
    tape->in.clear();
    tape->out.clear();
    tape->in.reserve(ops_.size());
    tape->out.reserve(ops_.size());
  }
  for (const OpSpec& op : ops_) {
    if (tape) tape->in.push_back(cur);
    Tensor4 next;
    switch (op.kind) {
      case OpKind::conv:
        next = convs_[op.conv].forward(cur);
        break;
      case OpKind::leaky:
        next = leaky_relu(cur, op.slope);
        break;
      case OpKind::sigmoid:
        next = sigmoid(cur);
        break;
      case OpKind::up2:
        next = upsample2(cur);
        break;
      case OpKind::gap:
        next = global_avg_pool(cur);
        break;
      case OpKind::save:
        slots[op.slot] = cur;
        next = std::move(cur);
        break;
      case OpKind::concat:
        next = concat_channels(cur, slots[op.slot]);
        break;
      case OpKind::norm:
        next = std::move(cur);
        break;
    }
    if (tape) {
      tape->out.push_back(op.kind == OpKind::sigmoid ? next : Tensor4());
    }
    cur = std::move(next);
  }
  if (tape) tape->output = cur;
  return cur;
}

Tensor4 OpNet::backward(const NetTape& tape, const Tensor4& d_output) {
  if (tape.in.size() != ops_.size()) {
    fail(ErrorKind::validation, "tape does not match the network program");
  }
  std::vector<Tensor4> slot_grad(static_cast<std::size_t>(slot_count_));
  Tensor4 d = d_output;
  for (int i = static_cast<int>(ops_.size()) - 1; i >= 0; --i) {
    const OpSpec& op = ops_[i];
    switch (op.kind) {
      case OpKind::conv:
        d = convs_[op.conv].backward(tape.in[i], d);
        break;
      case OpKind::leaky:
        d = leaky_relu_backward(tape.in[i], d, op.slope);
        break;
      case OpKind::sigmoid:
        d = sigmoid_backward(tape.out[i], d);
        break;
      case OpKind::up2:
        d = upsample2_backward(d);
        break;
      case OpKind::gap:
        d = global_avg_pool_backward(d, tape.in[i].h, tape.in[i].w);
        break;
      case OpKind::save:
        if (slot_grad[op.slot].size() > 0) {
          add_into(d, slot_grad[op.slot]);
        }
        break;
      case OpKind::concat: {
        Tensor4 dc;
        Tensor4 ds;
        split_channels(d, tape.in[i].c, dc, ds);
        if (slot_grad[op.slot].size() == 0) {
          slot_grad[op.slot] = std::move(ds);
        } else {
          add_into(slot_grad[op.slot], ds);
        }
        d = std::move(dc);
        break;
      }
      case OpKind::norm:
        break;
    }
  }
  return d;
}

std::vector<Param*> OpNet::params() {
  std::vector<Param*> out;
  out.reserve(convs_.size() * 2);
  for (Conv2d& c : convs_) {
    out.push_back(&c.weight());
    out.push_back(&c.bias());
  }
  return out;
}

void OpNet::zero_grad() {
  for (Conv2d& c : convs_) {
    c.weight().zero_grad();
    c.bias().zero_grad();
  }
}

namespace {

void build_compact(OpNet& net, const GeneratorConfig& cfg) {
  const int d = cfg.depth;
  const auto ch = [&](int i) { return cfg.base_channels << i; };
  const OpSpec act{OpKind::leaky, -1, -1, 0.2};

  net.add_conv("g.stem", {cfg.in_channels, ch(0), 3, 3, 1});
  net.push(act);
  std::vector<int> skip(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    skip[i] = net.new_slot();
    net.push({OpKind::save, -1, skip[i], 0.0});
    net.add_conv("g.down" + std::to_string(i), {ch(i), ch(i + 1), 3, 3, 2});
    net.push(act);
    net.add_conv("g.ref" + std::to_string(i), {ch(i + 1), ch(i + 1), 3, 3, 1});
    net.push(act);
  }
  for (int i = d - 1; i >= 0; --i) {
    net.push({OpKind::up2, -1, -1, 0.0});
    net.add_conv("g.up" + std::to_string(i), {ch(i + 1), ch(i), 3, 3, 1});
    net.push(act);
    net.push({OpKind::concat, -1, skip[i], 0.0});
    net.add_conv("g.mix" + std::to_string(i), {2 * ch(i), ch(i), 3, 3, 1});
    net.push(act);
  }
  net.add_conv("g.head", {ch(0), 1, 1, 1, 1});
  net.push({OpKind::sigmoid, -1, -1, 0.0});
}

// Fixed full-scale network. Encoder ladder: channels
// 3 -> 6,40,50,60,100,100,150,300,500 with kernels 5,5,5,5,3,5,5,5,4 and
// strides 1,2,2,1,2,1,2,2,2 (six downsamples). The decoder mirrors those
// resolutions; each stage convolves, then concatenates the encoder feature
// saved at that resolution. The last two stages fold the raw input back in,
// and a 1x1 conv with logistic squashing emits the map.
void build_full256(OpNet& net, const GeneratorConfig& cfg) {
  struct Stage {
    int ch;
    int k;
    int s;
  };
  static constexpr Stage kEnc[9] = {{6, 5, 1},   {40, 5, 2},  {50, 5, 2},
                                    {60, 5, 1},  {100, 3, 2}, {100, 5, 1},
                                    {150, 5, 2}, {300, 5, 2}, {500, 4, 2}};
  const OpSpec act{OpKind::leaky, -1, -1, 0.2};
  const OpSpec norm{OpKind::norm, -1, -1, 0.0};

  const int slot_in = net.new_slot();
  net.push({OpKind::save, -1, slot_in, 0.0});
  int cur = cfg.in_channels;
  int skip[9] = {};
  for (int i = 0; i < 9; ++i) {
    net.add_conv("g.enc" + std::to_string(i + 1),
                 {cur, kEnc[i].ch, kEnc[i].k, kEnc[i].k, kEnc[i].s});
    net.push(norm);
    net.push(act);
    cur = kEnc[i].ch;
    if (i < 8) {
      skip[i] = net.new_slot();
      net.push({OpKind::save, -1, skip[i], 0.0});
    }
  }

  struct Dec {
    int out_ch;
    int k;
    bool up;
    int skip;  // encoder stage index (0-based), -1 = raw input
  };
  static constexpr Dec kDec[9] = {
      {300, 4, true, 7}, {150, 4, true, 6}, {100, 3, true, 5},
      {100, 6, false, 4}, {60, 5, true, 3}, {50, 6, false, 2},
      {40, 6, true, 1}, {20, 5, true, 0}, {20, 5, false, -1}};
  for (int i = 0; i < 9; ++i) {
    if (kDec[i].up) net.push({OpKind::up2, -1, -1, 0.0});
    net.add_conv("g.dec" + std::to_string(i + 10),
                 {cur, kDec[i].out_ch, kDec[i].k, kDec[i].k, 1});
    net.push(norm);
    net.push(act);
    cur = kDec[i].out_ch;
    if (kDec[i].skip >= 0) {
      net.push({OpKind::concat, -1, skip[kDec[i].skip], 0.0});
      cur += kEnc[kDec[i].skip].ch;
    }
    if (i >= 7) {
      net.push({OpKind::concat, -1, slot_in, 0.0});
      cur += cfg.in_channels;
    }
  }
  net.add_conv("g.out", {cur, 1, 1, 1, 1});
  net.push({OpKind::sigmoid, -1, -1, 0.0});
}

}  // namespace

Generator::Generator(const GeneratorConfig& cfg) : cfg_(cfg) {
  if (cfg.in_channels <= 0) {
    fail(ErrorKind::parameter, "generator input channels must be positive");
  }
  if (cfg.preset == "compact") {
    if (cfg.depth < 1 || cfg.depth > 8 || cfg.base_channels < 1) {
      fail(ErrorKind::parameter, "generator depth/base_channels out of range");
    }
    build_compact(net_, cfg_);
    divisor_ = 1 << cfg.depth;
  } else if (cfg.preset == "full256") {
    build_full256(net_, cfg_);
    divisor_ = 64;
  } else {
    fail(ErrorKind::parameter, "unknown generator preset: " + cfg.preset);
  }
}

void Generator::init(Rng& rng) { net_.init(rng); }

Tensor4 Generator::forward(const Tensor4& x, NetTape* tape) const {
  if (x.c != cfg_.in_channels) {
    fail(ErrorKind::validation, "generator input channel mismatch");
  }
  if (x.h % divisor_ != 0 || x.w % divisor_ != 0) {
    fail(ErrorKind::validation, "generator input dims must be divisible by " +
                                    std::to_string(divisor_));
  }
  return net_.forward(x, tape);
}

Tensor4 Generator::backward(const NetTape& tape, const Tensor4& d_output) {
  return net_.backward(tape, d_output);
}

std::vector<Param*> Generator::params() { return net_.params(); }

void Generator::zero_grad() { net_.zero_grad(); }

Discriminator::Discriminator(const DiscriminatorConfig& cfg) : cfg_(cfg) {
  if (cfg.in_channels <= 0 || cfg.base_channels < 1 || cfg.conv_layers < 1 ||
      cfg.conv_layers > 8) {
    fail(ErrorKind::parameter, "discriminator config out of range");
  }
  const OpSpec act{OpKind::leaky, -1, -1, cfg.slope};
  int cur = cfg.in_channels;
  for (int i = 0; i < cfg.conv_layers; ++i) {
    const int out = cfg.base_channels << i;
    net_.add_conv("d.c" + std::to_string(i), {cur, out, 3, 3, 2});
    net_.push(act);
    cur = out;
  }
  net_.push({OpKind::gap, -1, -1, 0.0});
  net_.add_conv("d.head", {cur, 1, 1, 1, 1});
  net_.push({OpKind::sigmoid, -1, -1, 0.0});
}

void Discriminator::init(Rng& rng) { net_.init(rng); }

Tensor4 Discriminator::forward(const Tensor4& x, NetTape* tape) const {
  if (x.c != cfg_.in_channels) {
    fail(ErrorKind::validation, "discriminator input channel mismatch");
  }
  return net_.forward(x, tape);
}

Tensor4 Discriminator::backward(const NetTape& tape, const Tensor4& d_output) {
  return net_.backward(tape, d_output);
}

std::vector<Param*> Discriminator::params() { return net_.params(); }

void Discriminator::zero_grad() { net_.zero_grad(); }

std::vector<double> flatten_scores(const Tensor4& t) {
  if (t.c != 1 || t.h != 1 || t.w != 1) {
    fail(ErrorKind::validation, "score tensor must be (n, 1, 1, 1)");
  }
  return t.v;
}

Adam::Adam(AdamConfig cfg, std::vector<Param*> params)
    : cfg_(cfg), params_(std::move(params)) {
  if (!(cfg.lr > 0.0) || cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 ||
      cfg.beta2 < 0.0 || cfg.beta2 >= 1.0 || !(cfg.eps > 0.0)) {
    fail(ErrorKind::parameter, "optimizer hyperparameters out of range");
  }
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    m_.emplace_back(p->count(), 0.0);
    v_.emplace_back(p->count(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Param& p = *params_[pi];
    std::vector<double>& m = m_[pi];
    std::vector<double>& v = v_[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) {
    p->zero_grad();
  }
}

}  // namespace rmap
