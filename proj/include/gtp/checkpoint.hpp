#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "gtp/dataset.hpp"
#include "gtp/model.hpp"

namespace gtp {

/// Checkpoint layout (all little-endian):
///   "GTPC", u32 version,
///   u32 d_v, d_w, H, d_f, H_P, layer_count, K,
///   u32 variant, f64 lambda, u32 flags, f64 layer-norm eps,
///   u32 tensor count, u32 value count,
///   then every parameter tensor in Model::named_tensors() order as f32.
/// flags: bit0 tanh fusion, bit1 tanh graph activation, bit2 per-layer
/// adjacency, bit3 raw pointer features.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  std::uint32_t version = kCheckpointVersion;
  ModelConfig config;
  std::uint32_t tensor_count = 0;
  std::uint32_t value_count = 0;

  std::string describe() const;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model);
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

/// Throws DataError carrying both headers when the samples' feature widths
/// differ from the checkpoint's.
void check_compatible(const CheckpointHeader& header, std::span<const VideoSample> samples);

}  // namespace gtp
