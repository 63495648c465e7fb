#include "dreamer/tokens/fsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dreamer::tokens {

FsqSpec::FsqSpec(std::vector<int> levels) : levels_(std::move(levels)), size_(1) {
  if (levels_.empty()) throw InvalidInput("FSQ needs at least one channel");
  for (int l : levels_) {
    if (l < 2) throw InvalidInput("FSQ level counts must be >= 2");
    size_ *= static_cast<std::uint64_t>(l);
    if (size_ >= std::numeric_limits<Token>::max()) throw InvalidInput("FSQ codebook exceeds 32-bit tokens");
  }
}

double FsqSpec::level_value(int channel, int rank) const {
  const int l = levels_[static_cast<std::size_t>(channel)];
  return -1.0 + 2.0 * rank / (l - 1);
}

Token FsqSpec::quantize(std::span<const double> latent) const {
  if (latent.size() != levels_.size())
    throw InvalidInput("latent has " + std::to_string(latent.size()) + " channels, FSQ expects " +
                       std::to_string(levels_.size()));
  std::uint64_t index = 0;
  for (std::size_t c = latent.size(); c-- > 0;) {
    if (!std::isfinite(latent[c])) throw InvalidInput("FSQ latent must be finite");
    const int l = levels_[c];
    const double x = std::clamp(latent[c], -1.0, 1.0);
    const int rank = std::clamp(static_cast<int>(std::round((x + 1.0) * (l - 1) / 2.0)), 0, l - 1);
    index = index * static_cast<std::uint64_t>(l) + static_cast<std::uint64_t>(rank);
  }
  return static_cast<Token>(index);
}

VecX<double> FsqSpec::dequantize(Token index) const {
  if (index >= size_) throw InvalidInput("FSQ index " + std::to_string(index) + " out of range");
  VecX<double> out(static_cast<Eigen::Index>(levels_.size()));
  std::uint64_t rest = index;
  for (std::size_t c = 0; c < levels_.size(); ++c) {
    const auto l = static_cast<std::uint64_t>(levels_[c]);
    out[static_cast<Eigen::Index>(c)] = level_value(static_cast<int>(c), static_cast<int>(rest % l));
    rest /= l;
  }
  return out;
}

}  // namespace dreamer::tokens
