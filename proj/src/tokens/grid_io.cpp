#include "dreamer/tokens/grid_io.hpp"

#include <cstring>

namespace dreamer::tokens {

namespace {
constexpr char kMagic[8] = {'D', 'R', 'M', 'G', 'R', 'I', 'D', '1'};
}

binary::Bytes encode_grid(const TokenGrid& grid, const FactorizedVocab& vocab) {
  grid.validate();
  if (grid.vocab_size != vocab.size()) throw InvalidInput("grid vocabulary does not match");
  binary::Bytes out(kMagic, kMagic + 8);
  for (int v : {grid.frames, grid.height, grid.width, grid.t_hist}) binary::put_le(out, static_cast<std::uint32_t>(v));
  binary::put_le(out, vocab.factor_size());
  binary::put_le(out, static_cast<std::uint32_t>(vocab.factors()));
  for (Token z : grid.tokens) binary::put_le(out, z);
  return out;
}

GridFile decode_grid(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes, "token grid");
  if (std::memcmp(r.take(8).data(), kMagic, 8) != 0) throw FormatError("token grid: bad magic");
  std::uint32_t dims[4];
  for (auto& d : dims) d = r.get<std::uint32_t>();
  const std::uint32_t factor_size = r.get<std::uint32_t>();
  const std::uint32_t factors = r.get<std::uint32_t>();
  if (dims[0] > (1u << 20) || dims[1] > (1u << 16) || dims[2] > (1u << 16) || factors > 64)
    throw FormatError("token grid: implausible header");
  const std::uint64_t count = static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2];
  if (r.remaining() != count * 4) throw FormatError("token grid: payload size does not match its header");
  try {
    FactorizedVocab vocab(factor_size, static_cast<int>(factors));
    TokenGrid grid;
    grid.frames = static_cast<int>(dims[0]);
    grid.height = static_cast<int>(dims[1]);
    grid.width = static_cast<int>(dims[2]);
    grid.t_hist = static_cast<int>(dims[3]);
    grid.vocab_size = vocab.size();
    grid.tokens.resize(count);
    for (auto& z : grid.tokens) z = r.get<Token>();
    grid.validate();
    return {std::move(grid), std::move(vocab)};
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("token grid: ") + e.what());
  }
}

void save_grid(const std::filesystem::path& path, const TokenGrid& grid, const FactorizedVocab& vocab) {
  binary::write_file(path, encode_grid(grid, vocab));
}

GridFile load_grid(const std::filesystem::path& path) { return decode_grid(binary::read_file(path)); }

TokenGrid random_grid(Rng& rng, int frames, int height, int width, int history, const FactorizedVocab& vocab) {
  TokenGrid grid(frames, height, width, history, vocab);
  for (auto& z : grid.tokens) z = static_cast<Token>(rng.uniform_int(vocab.size()));
  return grid;
}

}  // namespace dreamer::tokens
