// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmap/losses.hpp"
#include "rmap/model.hpp"

namespace rmap {

// On-disk model state. Binary little-endian layout:
//   magic "RMEG", u32 format version,
//   generator config (preset string, depth, base, in_channels),
//   discriminator config (in_channels, base, conv_layers, f64 slope),
//   u32 blob count, then per blob: name, u32 rank, u32 dims[], f32 values,
//   optimizer sections (generator, discriminator): u8 present flag, u64 step
//   count, per bound parameter u64 length + f32 first/second moments,
//   phase state (u32 phase, u32 epoch, f64 tau, u32 patience,
//   u32 max_phase1_epochs, u32 history length, f64 history).
// Parameters are stored as 32-bit floats; in-memory math is double, so a
// save/load round trip quantizes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedBlob {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

struct OptimizerBlob {
  bool present = false;
  std::uint64_t steps = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
};

struct Checkpoint {
  GeneratorConfig gen;
  DiscriminatorConfig disc;
  std::vector<NamedBlob> params;  // generator blobs first, then discriminator
  OptimizerBlob gen_opt;
  OptimizerBlob disc_opt;
  PhaseState phase;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Captures live training state. Optimizers may be null (inference snapshot).
Checkpoint snapshot_state(Generator& gen, Discriminator& disc,
                          const Adam* gen_opt, const Adam* disc_opt,
                          const PhaseState& phase);

// Writes checkpoint values back into live objects. Parameter names and
// shapes must match the models exactly; optimizer restore requires the
// matching section to be present.
void restore_state(const Checkpoint& ckpt, Generator& gen, Discriminator& disc,
                   Adam* gen_opt, Adam* disc_opt, PhaseState* phase);

// Rebuilds just the generator for inference.
Generator generator_from_checkpoint(const Checkpoint& ckpt);

}  // namespace rmap
