#include "dreamer/tokens/maskgit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dreamer::tokens {

TableLookupPredictor::TableLookupPredictor(TokenGrid target, FactorizedVocab vocab, double margin)
    : target_(std::move(target)), vocab_(vocab), margin_(margin) {
  target_.validate();
  if (target_.vocab_size != vocab_.size()) throw InvalidInput("target grid and vocabulary disagree on size");
  for (Token z : target_.tokens)
    if (z == target_.mask_token()) throw InvalidInput("oracle target must not contain mask tokens");
}

PredictorOutput TableLookupPredictor::predict(const TokenGrid& grid, int t, const Conditioning&) {
  if (grid.frames != target_.frames || grid.spatial() != target_.spatial())
    throw InvalidInput("oracle predictor queried with a grid of different shape");
  if (t < 0 || t >= target_.frames) throw InvalidInput("oracle predictor frame out of range");
  ++calls_;
  const int vf = static_cast<int>(vocab_.factor_size());
  PredictorOutput out;
  out.video_logits = MatX<double>::Zero(target_.spatial(), vocab_.factors() * vf);
  std::vector<std::uint32_t> digits(static_cast<std::size_t>(vocab_.factors()));
  for (int s = 0; s < target_.spatial(); ++s) {
    vocab_.decompose(target_.at(t, s), digits);
    for (int k = 0; k < vocab_.factors(); ++k)
      out.video_logits(s, k * vf + static_cast<int>(digits[static_cast<std::size_t>(k)])) = margin_;
  }
  return out;
}

void MaskSchedule::validate() const {
  if (n_steps < 1) throw InvalidInput("decode schedule needs n_steps >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw InvalidInput("decode temperature must be positive");
}

namespace {

/// Softmax of x / temperature, max-shifted.
VecX<double> softmax(const Eigen::Ref<const VecX<double>>& x, double temperature = 1.0) {
  const VecX<double> scaled = x / temperature;
  VecX<double> e = (scaled.array() - scaled.maxCoeff()).exp();
  return e / e.sum();
}

std::uint32_t sample_categorical(const VecX<double>& p, Rng& rng) {
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    cumulative += p[i];
    if (u < cumulative) return static_cast<std::uint32_t>(i);
  }
  // Rounding left the tail uncovered; fall back to the last non-zero entry.
  for (Eigen::Index i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return static_cast<std::uint32_t>(i);
  return 0;
}

}  // namespace

double confidence(const Eigen::Ref<const VecX<double>>& factored_logits, int factors) {
  if (factors < 1 || factored_logits.size() % factors != 0) throw InvalidInput("logit row is not k x v_f");
  if (!factored_logits.allFinite()) throw InvalidInput("confidence needs finite logits");
  const Eigen::Index vf = factored_logits.size() / factors;
  double c = 1.0;
  for (int k = 0; k < factors; ++k) c *= softmax(factored_logits.segment(k * vf, vf)).maxCoeff();
  return c;
}

int masked_after_iteration(int i, int n_steps, int spatial) {
  if (n_steps < 1 || i < 0 || i >= n_steps) throw InvalidInput("decode iteration out of range");
  if (i + 1 == n_steps) return 0;
  const double gamma = std::cos(std::numbers::pi / 2.0 * static_cast<double>(i + 1) / static_cast<double>(n_steps));
  const double scaled = gamma * spatial;
  const double nearest = std::round(scaled);
  if (std::abs(scaled - nearest) <= 1e-9) return static_cast<int>(nearest);
  return static_cast<int>(std::ceil(scaled));
}

FrameDecodeResult decode_frame(Predictor& predictor, const TokenGrid& context, int t, const MaskSchedule& schedule,
                               Rng& rng, const Conditioning& cond) {
  schedule.validate();
  context.validate();
  const FactorizedVocab& vocab = predictor.vocab();
  if (context.vocab_size != vocab.size()) throw InvalidInput("context grid and predictor vocabulary disagree");
  if (t < 0 || t >= context.frames) throw InvalidInput("decode frame index out of range");
  for (int tp = 0; tp < t; ++tp)
    for (int s = 0; s < context.spatial(); ++s)
      if (context.is_masked(tp, s)) throw InvalidInput("frames before the decoded frame must be fully populated");

  const int S = context.spatial();
  const int K = vocab.factors();
  const int vf = static_cast<int>(vocab.factor_size());

  TokenGrid grid = context;
  grid.mask_frame(t);

  FrameDecodeResult result;
  result.commit_iteration.assign(static_cast<std::size_t>(S), -1);

  std::vector<std::uint32_t> digits(static_cast<std::size_t>(K));
  std::vector<Token> sampled(static_cast<std::size_t>(S), 0);
  std::vector<double> score(static_cast<std::size_t>(S), 0.0);

  for (int i = 0; i < schedule.n_steps; ++i) {
    const PredictorOutput pred = predictor.predict(grid, t, cond);
    if (pred.video_logits.rows() != S || pred.video_logits.cols() != K * vf)
      throw InvalidInput("predictor returned logits of the wrong shape");

    std::vector<std::size_t> masked;
    for (int s = 0; s < S; ++s) {
      if (!grid.is_masked(t, s)) continue;
      masked.push_back(static_cast<std::size_t>(s));
      double c = 1.0;
      for (int k = 0; k < K; ++k) {
        const VecX<double> row = pred.video_logits.row(s).segment(k * vf, vf).transpose();
        if (!row.allFinite()) throw InvalidInput("predictor returned non-finite logits");
        const std::uint32_t d = sample_categorical(softmax(row, schedule.temperature), rng);
        digits[static_cast<std::size_t>(k)] = d;
        c *= softmax(row)[d];
      }
      sampled[static_cast<std::size_t>(s)] = vocab.compose(digits);
      score[static_cast<std::size_t>(s)] = c;
    }

    const int keep_masked = std::min(masked_after_iteration(i, schedule.n_steps, S), static_cast<int>(masked.size()));
    const std::size_t n_commit = masked.size() - static_cast<std::size_t>(keep_masked);

    std::vector<std::size_t> to_commit;
    if (schedule.mode == UnmaskMode::kGreedy) {
      std::stable_sort(masked.begin(), masked.end(),
                       [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
      to_commit.assign(masked.begin(), masked.begin() + static_cast<std::ptrdiff_t>(n_commit));
    } else {
      // Partial Fisher-Yates: the first keep_masked picks stay masked.
      std::vector<std::size_t> pool = masked;
      for (int j = 0; j < keep_masked; ++j) {
        const auto pick = j + static_cast<std::size_t>(rng.uniform_int(pool.size() - static_cast<std::size_t>(j)));
        std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
      }
      to_commit.assign(pool.begin() + keep_masked, pool.end());
      std::sort(to_commit.begin(), to_commit.end());
    }
    for (std::size_t s : to_commit) {
      grid.at(t, static_cast<int>(s)) = sampled[s];
      result.commit_iteration[s] = i;
      result.commit_order.push_back(s);
    }
    result.masked_counts.push_back(keep_masked);
  }

  result.tokens.resize(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) result.tokens[static_cast<std::size_t>(s)] = grid.at(t, s);
  return result;
}

RolloutResult decode_rollout(Predictor& predictor, const TokenGrid& context, int n_future,
                             const MaskSchedule& schedule, Rng& rng, const Conditioning& cond) {
  context.validate();
  if (n_future < 0) throw InvalidInput("n_future must be non-negative");
  if (context.t_hist + n_future > context.frames) throw InvalidInput("rollout exceeds the grid's frame count");
  RolloutResult out{context, {}};
  if (n_future == 0) return out;
  for (int t = context.t_hist; t < context.frames; ++t) out.grid.mask_frame(t);
  for (int t = context.t_hist; t < context.t_hist + n_future; ++t) {
    FrameDecodeResult frame = decode_frame(predictor, out.grid, t, schedule, rng, cond);
    for (int s = 0; s < out.grid.spatial(); ++s) out.grid.at(t, s) = frame.tokens[static_cast<std::size_t>(s)];
    out.frames.push_back(std::move(frame));
  }
  out.grid.t_hist = context.t_hist + n_future;
  return out;
}

}  // namespace dreamer::tokens
