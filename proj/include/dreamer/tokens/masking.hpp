#pragma once

// Training-time corruption of token grids: cosine-schedule MLM masking,
// autoregressive-style masking and random per-digit token corruption.

#include "dreamer/random.hpp"
#include "dreamer/tokens/grid.hpp"

#include <optional>
#include <span>

namespace dreamer::tokens {

/// p = cos(pi/2 * u), u in [0, 1].
double cosine_mask_prob(double u);

struct MaskedGrid {
  TokenGrid grid;
  MaskSet mask;
};

/// Masks frames t >= max(1, t_hist) position-wise with per-frame
/// probability cosine_mask_prob(u_t). `frame_u` supplies u_t for each frame
/// (entries for unmasked frames are ignored); when absent the u_t are drawn
/// from `rng` in frame order before any position draw.
MaskedGrid apply_mlm_mask(const TokenGrid& grid, Rng& rng, std::optional<std::span<const double>> frame_u = {});

/// Mask probability of frame t under AR-style masking with boundary t_star:
/// a linear ramp from 0.5 at t_star to 1.0 at frames-1 (1.0 when t_star is
/// the last frame), 0 before t_star.
double ar_mask_prob(int t, int t_star, int frames);

/// Draws t_star uniformly from {t_hist, ..., frames-1} (unless forced) and
/// masks frames >= t_star with ar_mask_prob.
MaskedGrid apply_ar_mask(const TokenGrid& grid, Rng& rng, std::optional<int> forced_t_star = {});

struct CorruptionResult {
  TokenGrid grid;
  double rate = 0.0;          // r_max * u
  std::size_t trials = 0;     // digits considered
  std::size_t redrawn = 0;    // digits that were redrawn (may land on the same value)
};

/// Redraws each factored digit of every non-mask token uniformly from
/// {0..v_f-1} with probability r_max * u, u ~ U(0,1) drawn once per call
/// (the batch) unless forced.
CorruptionResult random_corruption(const TokenGrid& grid, const FactorizedVocab& vocab, double r_max, Rng& rng,
                                   std::optional<double> forced_u = {});

/// Full training corruption: random corruption, then AR-style masking with
/// probability rho_non_mlm or MLM masking otherwise.
MaskedGrid corrupt_for_training(const TokenGrid& grid, const FactorizedVocab& vocab, Rng& rng, double r_max = 0.2,
                                double rho_non_mlm = 0.5);

}  // namespace dreamer::tokens
