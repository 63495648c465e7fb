#pragma once

// Iterative masked decoding of future frames against a pluggable predictor.

#include "dreamer/random.hpp"
#include "dreamer/tokens/grid.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace dreamer::tokens {

/// Per-frame control inputs shared by every predictor: actions (T x 3) and
/// joint angles (T x N_j). Either may be empty for predictors that ignore them.
struct Conditioning {
  MatX<double> actions;
  MatX<double> joints;
};

/// Output for one target frame. Row s of `video_logits` holds the k x v_f
/// factored logits of spatial position s, factor-major.
struct PredictorOutput {
  MatX<double> video_logits;    // S x (k * v_f)
  MatX<double> contact_logits;  // S x (k * v_f), or empty
  VecX<double> joints;          // N_j, or empty
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual const FactorizedVocab& vocab() const = 0;
  /// Logits for frame `t` of `grid`, which may contain mask sentinels.
  virtual PredictorOutput predict(const TokenGrid& grid, int t, const Conditioning& cond) = 0;
};

/// Deterministic table lookup: the target token of every position gets logit
/// `margin` in each factor, every other digit gets 0.
class TableLookupPredictor : public Predictor {
 public:
  TableLookupPredictor(TokenGrid target, FactorizedVocab vocab, double margin = 1000.0);

  const FactorizedVocab& vocab() const override { return vocab_; }
  PredictorOutput predict(const TokenGrid& grid, int t, const Conditioning& cond) override;

  int calls() const { return calls_; }

 private:
  TokenGrid target_;
  FactorizedVocab vocab_;
  double margin_;
  int calls_ = 0;
};

enum class UnmaskMode { kGreedy, kRandom };

struct MaskSchedule {
  int n_steps = 8;
  double temperature = 1.0;
  UnmaskMode mode = UnmaskMode::kGreedy;

  void validate() const;
};

/// prod_k max_v softmax(logits_k)_v over a factor-major row of k * v_f logits.
double confidence(const Eigen::Ref<const VecX<double>>& factored_logits, int factors);

/// Positions left masked after iteration i: ceil(cos(pi/2 * (i+1)/N) * S).
/// gamma * S within 1e-9 of an integer counts as that integer, and the final
/// iteration always leaves zero.
int masked_after_iteration(int i, int n_steps, int spatial);

struct FrameDecodeResult {
  std::vector<Token> tokens;          // S committed tokens
  std::vector<int> masked_counts;     // masked positions left after each iteration
  std::vector<int> commit_iteration;  // iteration at which each position was committed
  std::vector<std::size_t> commit_order;  // positions in commit order
};

/// Decodes frame t of `context` (frames < t fully populated). Each iteration
/// queries the predictor, samples every still-masked position at temperature
/// tau (one uniform per factor, positions ascending), scores it by the
/// product over factors of the untempered probability of the sampled digit,
/// and commits all but the n lowest-scoring (greedy; ties commit the lower
/// position first) or all but n uniformly chosen (random) positions.
FrameDecodeResult decode_frame(Predictor& predictor, const TokenGrid& context, int t, const MaskSchedule& schedule,
                               Rng& rng, const Conditioning& cond = {});

struct RolloutResult {
  TokenGrid grid;
  std::vector<FrameDecodeResult> frames;
};

/// Decodes frames t_hist .. t_hist + n_future - 1 in order, writing each back
/// before the next. Frames at and beyond t_hist start masked. The returned
/// grid's t_hist is advanced by n_future.
RolloutResult decode_rollout(Predictor& predictor, const TokenGrid& context, int n_future,
                             const MaskSchedule& schedule, Rng& rng, const Conditioning& cond = {});

}  // namespace dreamer::tokens
