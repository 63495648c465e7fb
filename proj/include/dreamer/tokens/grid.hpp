#pragma once

#include "dreamer/tokens/vocab.hpp"

#include <vector>

namespace dreamer::tokens {

/// T frames of h x w discrete tokens, frame-major then row-major. Entries are
/// valid tokens or the vocabulary's mask sentinel.
struct TokenGrid {
  int frames = 0;
  int height = 0;
  int width = 0;
  int t_hist = 0;
  std::uint64_t vocab_size = 0;
  std::vector<Token> tokens;

  TokenGrid() = default;
  TokenGrid(int t, int h, int w, int history, const FactorizedVocab& vocab)
      : frames(t), height(h), width(w), t_hist(history), vocab_size(vocab.size()),
        tokens(static_cast<std::size_t>(t) * h * w, vocab.mask_token()) {
    validate();
  }

  int spatial() const { return height * width; }
  Token mask_token() const { return static_cast<Token>(vocab_size); }

  Token& at(int t, int s) { return tokens[index(t, s)]; }
  Token at(int t, int s) const { return tokens[index(t, s)]; }
  bool is_masked(int t, int s) const { return at(t, s) == mask_token(); }

  std::size_t index(int t, int s) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(spatial()) + static_cast<std::size_t>(s);
  }

  void mask_frame(int t) {
    for (int s = 0; s < spatial(); ++s) at(t, s) = mask_token();
  }

  void validate() const {
    if (frames < 0 || height < 1 || width < 1) throw InvalidInput("token grid dimensions must be positive");
    if (t_hist < 0 || t_hist > frames) throw InvalidInput("t_hist must lie in [0, frames]");
    if (tokens.size() != static_cast<std::size_t>(frames) * spatial()) throw InvalidInput("token grid size mismatch");
    for (Token z : tokens)
      if (z > mask_token()) throw InvalidInput("token outside vocabulary");
  }

  bool operator==(const TokenGrid&) const = default;
};

/// Flat (t * S + s) indices of masked positions, ascending.
using MaskSet = std::vector<std::size_t>;

}  // namespace dreamer::tokens
