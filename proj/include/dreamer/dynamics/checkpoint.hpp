#pragma once

// Weight checkpoint container:
//   "DRMCKPT1" | u64 LE header length | JSON header | f32 LE tensor data
// The header holds {"config": ..., "dtype": "f32le", "tensors": [{name, shape, offset}]}
// with offsets in bytes from the start of the data section.

#include "dreamer/binary_io.hpp"
#include "dreamer/dynamics/model.hpp"

#include <filesystem>

namespace dreamer::dynamics {

struct Checkpoint {
  ModelConfig config;
  ModelWeights<float> weights;
};

binary::Bytes encode_checkpoint(const ModelConfig& cfg, const ModelWeights<float>& weights);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg, const ModelWeights<float>& weights);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Loads and additionally requires the stored config to equal `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace dreamer::dynamics
