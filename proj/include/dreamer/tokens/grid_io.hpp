#pragma once

// Token grid file:
//   "DRMGRID1" | u32 frames | u32 height | u32 width | u32 t_hist
//   | u32 factor_size | u32 factors | u32 LE tokens (frame-major, row-major)
// Masked positions store the vocabulary's mask sentinel.

#include "dreamer/binary_io.hpp"
#include "dreamer/random.hpp"
#include "dreamer/tokens/grid.hpp"

namespace dreamer::tokens {

struct GridFile {
  TokenGrid grid;
  FactorizedVocab vocab;
};

binary::Bytes encode_grid(const TokenGrid& grid, const FactorizedVocab& vocab);
GridFile decode_grid(std::span<const std::uint8_t> bytes);

void save_grid(const std::filesystem::path& path, const TokenGrid& grid, const FactorizedVocab& vocab);
GridFile load_grid(const std::filesystem::path& path);

/// Grid whose valid tokens are uniform over the vocabulary and t_hist = `history`.
TokenGrid random_grid(Rng& rng, int frames, int height, int width, int history, const FactorizedVocab& vocab);

}  // namespace dreamer::tokens
