#include "dreamer/tokens/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dreamer::tokens {

double cosine_mask_prob(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidInput("cosine_mask_prob expects u in [0, 1]");
  if (u == 1.0) return 0.0;
  return std::cos(std::numbers::pi / 2.0 * u);
}

namespace {

MaskedGrid mask_frames(const TokenGrid& grid, std::span<const double> frame_prob, Rng& rng) {
  MaskedGrid out{grid, {}};
  for (int t = 0; t < grid.frames; ++t) {
    const double p = frame_prob[static_cast<std::size_t>(t)];
    if (p <= 0.0) continue;
    for (int s = 0; s < grid.spatial(); ++s) {
      if (p >= 1.0 || rng.bernoulli(p)) {
        out.grid.at(t, s) = grid.mask_token();
        out.mask.push_back(grid.index(t, s));
      }
    }
  }
  return out;
}

}  // namespace

MaskedGrid apply_mlm_mask(const TokenGrid& grid, Rng& rng, std::optional<std::span<const double>> frame_u) {
  grid.validate();
  if (frame_u && frame_u->size() != static_cast<std::size_t>(grid.frames))
    throw InvalidInput("apply_mlm_mask: need one u per frame");
  const int first = std::max(1, grid.t_hist);
  std::vector<double> prob(static_cast<std::size_t>(grid.frames), 0.0);
  for (int t = first; t < grid.frames; ++t) {
    const double u = frame_u ? (*frame_u)[static_cast<std::size_t>(t)] : rng.uniform01();
    prob[static_cast<std::size_t>(t)] = cosine_mask_prob(u);
  }
  return mask_frames(grid, prob, rng);
}

double ar_mask_prob(int t, int t_star, int frames) {
  if (t < t_star) return 0.0;
  const int last = frames - 1;
  if (t_star >= last) return 1.0;
  return 0.5 + 0.5 * static_cast<double>(t - t_star) / static_cast<double>(last - t_star);
}

MaskedGrid apply_ar_mask(const TokenGrid& grid, Rng& rng, std::optional<int> forced_t_star) {
  grid.validate();
  if (grid.t_hist < 1) throw InvalidInput("apply_ar_mask requires at least one history frame");
  if (grid.t_hist >= grid.frames) throw InvalidInput("apply_ar_mask requires at least one future frame");
  int t_star = 0;
  if (forced_t_star) {
    t_star = *forced_t_star;
    if (t_star < grid.t_hist || t_star >= grid.frames) throw InvalidInput("t_star outside [t_hist, frames)");
  } else {
    t_star = grid.t_hist + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(grid.frames - grid.t_hist)));
  }
  std::vector<double> prob(static_cast<std::size_t>(grid.frames));
  for (int t = 0; t < grid.frames; ++t) prob[static_cast<std::size_t>(t)] = ar_mask_prob(t, t_star, grid.frames);
  return mask_frames(grid, prob, rng);
}

CorruptionResult random_corruption(const TokenGrid& grid, const FactorizedVocab& vocab, double r_max, Rng& rng,
                                   std::optional<double> forced_u) {
  grid.validate();
  if (grid.vocab_size != vocab.size()) throw InvalidInput("grid and vocabulary disagree on size");
  if (!(r_max >= 0.0 && r_max <= 1.0)) throw InvalidInput("r_max must lie in [0, 1]");
  const double u = forced_u ? *forced_u : rng.uniform01();
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidInput("corruption u must lie in [0, 1]");

  CorruptionResult out{grid, r_max * u, 0, 0};
  if (out.rate == 0.0) return out;
  std::vector<std::uint32_t> digits(static_cast<std::size_t>(vocab.factors()));
  for (Token& z : out.grid.tokens) {
    if (z == grid.mask_token()) continue;
    vocab.decompose(z, digits);
    for (auto& d : digits) {
      ++out.trials;
      if (rng.bernoulli(out.rate)) {
        ++out.redrawn;
        d = static_cast<std::uint32_t>(rng.uniform_int(vocab.factor_size()));
      }
    }
    z = vocab.compose(digits);
  }
  return out;
}

MaskedGrid corrupt_for_training(const TokenGrid& grid, const FactorizedVocab& vocab, Rng& rng, double r_max,
                                double rho_non_mlm) {
  TokenGrid corrupted = random_corruption(grid, vocab, r_max, rng).grid;
  if (rng.bernoulli(rho_non_mlm)) return apply_ar_mask(corrupted, rng);
  return apply_mlm_mask(corrupted, rng);
}

}  // namespace dreamer::tokens
