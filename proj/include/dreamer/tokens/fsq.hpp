#pragma once

#include "dreamer/tokens/vocab.hpp"

#include <span>
#include <vector>

namespace dreamer::tokens {

/// Finite scalar quantization with per-channel level counts.
///
/// Channel c has levels -1 + 2j/(l_c - 1), j = 0..l_c-1. A latent is clamped
/// to [-1, 1], snapped to the nearest level (ties away from zero), and the
/// level ranks are composed mixed-radix with channel 0 least significant.
class FsqSpec {
 public:
  explicit FsqSpec(std::vector<int> levels);

  const std::vector<int>& levels() const { return levels_; }
  int channels() const { return static_cast<int>(levels_.size()); }
  std::uint64_t codebook_size() const { return size_; }

  Token quantize(std::span<const double> latent) const;
  VecX<double> dequantize(Token index) const;

  /// Level value of rank j in channel c.
  double level_value(int channel, int rank) const;

 private:
  std::vector<int> levels_;
  std::uint64_t size_;
};

}  // namespace dreamer::tokens
