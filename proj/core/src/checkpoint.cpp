// SPDX-License-Identifier: Apache-2.0
#include "rmap/checkpoint.hpp"

#include <cstring>
#include <utility>

#include "rmap/error.hpp"
#include "rmap/grid_io.hpp"

namespace rmap {
namespace {

static_assert(sizeof(float) == 4, "requires 32-bit float");

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

void put_f32(std::string& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_f64(std::string& out, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

struct Cursor {
  const char* p;
  std::size_t n;
  std::size_t off = 0;

  const char* take(std::size_t k) {
    if (off + k > n) {
      fail(ErrorKind::format, "checkpoint truncated at byte offset " +
                                  std::to_string(off));
    }
    const char* r = p + off;
    off += k;
    return r;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(4), 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, take(8), 8);
    return v;
  }
  float f32() {
    float v;
    std::memcpy(&v, take(4), 4);
    return v;
  }
  double f64() {
    double v;
    std::memcpy(&v, take(8), 8);
    return v;
  }
  std::string str() {
    const std::uint32_t len = u32();
    if (len > (1u << 20)) {
      fail(ErrorKind::format, "checkpoint string too long at byte offset " +
                                  std::to_string(off - 4));
    }
    return std::string(take(len), len);
  }
};

// One sane upper bound for every stored count; a corrupt length field fails
// fast instead of attempting a huge allocation.
constexpr std::uint64_t kMaxCount = 1ull << 28;

void check_count(std::uint64_t c, std::size_t off, const char* what) {
  if (c > kMaxCount) {
    fail(ErrorKind::format, std::string("implausible checkpoint ") + what +
                                " at byte offset " + std::to_string(off));
  }
}

void put_optimizer(std::string& out, const OptimizerBlob& o) {
  out.push_back(o.present ? 1 : 0);
  if (!o.present) return;
  put_u64(out, o.steps);
  put_u32(out, static_cast<std::uint32_t>(o.m.size()));
  for (std::size_t i = 0; i < o.m.size(); ++i) {
    put_u64(out, o.m[i].size());
    for (const float x : o.m[i]) put_f32(out, x);
    for (const float x : o.v[i]) put_f32(out, x);
  }
}

OptimizerBlob get_optimizer(Cursor& c) {
  OptimizerBlob o;
  o.present = *c.take(1) != 0;
  if (!o.present) return o;
  o.steps = c.u64();
  const std::uint32_t np = c.u32();
  check_count(np, c.off - 4, "optimizer parameter count");
  o.m.resize(np);
  o.v.resize(np);
  for (std::uint32_t i = 0; i < np; ++i) {
    const std::uint64_t len = c.u64();
    check_count(len, c.off - 8, "optimizer moment length");
    o.m[i].resize(len);
    o.v[i].resize(len);
    for (std::uint64_t k = 0; k < len; ++k) o.m[i][k] = c.f32();
    for (std::uint64_t k = 0; k < len; ++k) o.v[i][k] = c.f32();
  }
  return o;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::string out;
  out.append("RMEG");
  put_u32(out, kCheckpointVersion);

  put_str(out, ckpt.gen.preset);
  put_u32(out, static_cast<std::uint32_t>(ckpt.gen.depth));
  put_u32(out, static_cast<std::uint32_t>(ckpt.gen.base_channels));
  put_u32(out, static_cast<std::uint32_t>(ckpt.gen.in_channels));

  put_u32(out, static_cast<std::uint32_t>(ckpt.disc.in_channels));
  put_u32(out, static_cast<std::uint32_t>(ckpt.disc.base_channels));
  put_u32(out, static_cast<std::uint32_t>(ckpt.disc.conv_layers));
  put_f64(out, ckpt.disc.slope);

  put_u32(out, static_cast<std::uint32_t>(ckpt.params.size()));
  for (const NamedBlob& b : ckpt.params) {
    put_str(out, b.name);
    put_u32(out, static_cast<std::uint32_t>(b.shape.size()));
    std::uint64_t want = 1;
    for (const int d : b.shape) {
      put_u32(out, static_cast<std::uint32_t>(d));
      want *= static_cast<std::uint64_t>(d);
    }
    if (want != b.data.size()) {
      fail(ErrorKind::validation, "blob shape disagrees with data: " + b.name);
    }
    for (const float x : b.data) put_f32(out, x);
  }

  put_optimizer(out, ckpt.gen_opt);
  put_optimizer(out, ckpt.disc_opt);

  put_u32(out, static_cast<std::uint32_t>(ckpt.phase.phase));
  put_u32(out, static_cast<std::uint32_t>(ckpt.phase.epoch));
  put_f64(out, ckpt.phase.config.tau);
  put_u32(out, static_cast<std::uint32_t>(ckpt.phase.config.patience));
  put_u32(out, static_cast<std::uint32_t>(ckpt.phase.config.max_phase1_epochs));
  put_u32(out,
          static_cast<std::uint32_t>(ckpt.phase.validation_history.size()));
  for (const double x : ckpt.phase.validation_history) put_f64(out, x);

  write_file_bytes(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  Cursor c{bytes.data(), bytes.size()};
  if (bytes.size() < 8 || std::memcmp(c.take(4), "RMEG", 4) != 0) {
    fail(ErrorKind::format, "not a checkpoint file: " + path);
  }
  const std::uint32_t version = c.u32();
  if (version != kCheckpointVersion) {
    fail(ErrorKind::format, "unsupported checkpoint version " +
                                std::to_string(version) + ": " + path);
  }

  Checkpoint ck;
  ck.gen.preset = c.str();
  ck.gen.depth = static_cast<int>(c.u32());
  ck.gen.base_channels = static_cast<int>(c.u32());
  ck.gen.in_channels = static_cast<int>(c.u32());

  ck.disc.in_channels = static_cast<int>(c.u32());
  ck.disc.base_channels = static_cast<int>(c.u32());
  ck.disc.conv_layers = static_cast<int>(c.u32());
  ck.disc.slope = c.f64();

  const std::uint32_t nblobs = c.u32();
  check_count(nblobs, c.off - 4, "blob count");
  ck.params.resize(nblobs);
  for (std::uint32_t i = 0; i < nblobs; ++i) {
    NamedBlob& b = ck.params[i];
    b.name = c.str();
    const std::uint32_t rank = c.u32();
    check_count(rank, c.off - 4, "blob rank");
    b.shape.resize(rank);
    std::uint64_t want = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      b.shape[k] = static_cast<int>(c.u32());
      want *= static_cast<std::uint64_t>(b.shape[k]);
    }
    check_count(want, c.off, "blob size");
    b.data.resize(want);
    for (std::uint64_t k = 0; k < want; ++k) b.data[k] = c.f32();
  }

  ck.gen_opt = get_optimizer(c);
  ck.disc_opt = get_optimizer(c);

  ck.phase.phase = static_cast<int>(c.u32());
  ck.phase.epoch = static_cast<int>(c.u32());
  ck.phase.config.tau = c.f64();
  ck.phase.config.patience = static_cast<int>(c.u32());
  ck.phase.config.max_phase1_epochs = static_cast<int>(c.u32());
  const std::uint32_t hist = c.u32();
  check_count(hist, c.off - 4, "history length");
  ck.phase.validation_history.resize(hist);
  for (std::uint32_t i = 0; i < hist; ++i) {
    ck.phase.validation_history[i] = c.f64();
  }
  if (c.off != bytes.size()) {
    fail(ErrorKind::format, "trailing bytes after checkpoint payload: " + path);
  }
  return ck;
}

namespace {

NamedBlob blob_from_param(const Param& p) {
  NamedBlob b;
  b.name = p.name;
  b.shape = p.shape;
  b.data.resize(p.value.size());
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    b.data[i] = static_cast<float>(p.value[i]);
  }
  return b;
}

OptimizerBlob blob_from_adam(const Adam& a) {
  OptimizerBlob o;
  o.present = true;
  o.steps = a.steps();
  for (const std::vector<double>& m : a.first_moments()) {
    std::vector<float> f(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) f[i] = static_cast<float>(m[i]);
    o.m.push_back(std::move(f));
  }
  for (const std::vector<double>& v : a.second_moments()) {
    std::vector<float> f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = static_cast<float>(v[i]);
    o.v.push_back(std::move(f));
  }
  return o;
}

void params_from_blobs(const std::vector<NamedBlob>& blobs, std::size_t offset,
                       const std::vector<Param*>& params, const char* what) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::size_t bi = offset + i;
    if (bi >= blobs.size()) {
      fail(ErrorKind::format,
           std::string("checkpoint is missing parameters for the ") + what);
    }
    const NamedBlob& b = blobs[bi];
    Param& p = *params[i];
    if (b.name != p.name || b.shape != p.shape) {
      fail(ErrorKind::format, "checkpoint parameter mismatch: expected " +
                                  p.name + ", found " + b.name);
    }
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      p.value[k] = static_cast<double>(b.data[k]);
    }
  }
}

void adam_from_blob(const OptimizerBlob& o, Adam& a, const char* what) {
  if (!o.present) {
    fail(ErrorKind::format,
         std::string("checkpoint has no optimizer state for the ") + what);
  }
  std::vector<std::vector<double>>& m = a.first_moments();
  std::vector<std::vector<double>>& v = a.second_moments();
  if (o.m.size() != m.size()) {
    fail(ErrorKind::format,
         std::string("optimizer state size mismatch for the ") + what);
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (o.m[i].size() != m[i].size()) {
      fail(ErrorKind::format,
           std::string("optimizer moment length mismatch for the ") + what);
    }
    for (std::size_t k = 0; k < m[i].size(); ++k) {
      m[i][k] = static_cast<double>(o.m[i][k]);
      v[i][k] = static_cast<double>(o.v[i][k]);
    }
  }
  a.set_steps(o.steps);
}

}  // namespace

Checkpoint snapshot_state(Generator& gen, Discriminator& disc,
                          const Adam* gen_opt, const Adam* disc_opt,
                          const PhaseState& phase) {
  Checkpoint ck;
  ck.gen = gen.config();
  ck.disc = disc.config();
  for (const Param* p : gen.params()) ck.params.push_back(blob_from_param(*p));
  for (const Param* p : disc.params()) ck.params.push_back(blob_from_param(*p));
  if (gen_opt) ck.gen_opt = blob_from_adam(*gen_opt);
  if (disc_opt) ck.disc_opt = blob_from_adam(*disc_opt);
  ck.phase = phase;
  return ck;
}

void restore_state(const Checkpoint& ckpt, Generator& gen, Discriminator& disc,
                   Adam* gen_opt, Adam* disc_opt, PhaseState* phase) {
  const std::vector<Param*> gp = gen.params();
  const std::vector<Param*> dp = disc.params();
  if (ckpt.params.size() != gp.size() + dp.size()) {
    fail(ErrorKind::format, "checkpoint parameter count mismatch");
  }
  params_from_blobs(ckpt.params, 0, gp, "generator");
  params_from_blobs(ckpt.params, gp.size(), dp, "discriminator");
  if (gen_opt) adam_from_blob(ckpt.gen_opt, *gen_opt, "generator");
  if (disc_opt) adam_from_blob(ckpt.disc_opt, *disc_opt, "discriminator");
  if (phase) *phase = ckpt.phase;
}

Generator generator_from_checkpoint(const Checkpoint& ckpt) {
  Generator gen(ckpt.gen);
  params_from_blobs(ckpt.params, 0, gen.params(), "generator");
  return gen;
}

}  // namespace rmap
