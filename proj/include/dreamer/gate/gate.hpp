#pragma once

// Collision gate: sample an action, imagine its rollout, ask the judge,
// resample on rejection and retreat after max_attempts rejections.

#include "dreamer/dynamics/predictor.hpp"
#include "dreamer/excitation.hpp"
#include "dreamer/gate/judge.hpp"
#include "dreamer/gate/verdict.hpp"
#include "dreamer/tokens/fsq.hpp"

#include <memory>
#include <optional>

namespace dreamer::gate {

struct CandidateAction {
  Vector3d v = Vector3d::Zero();  // commanded velocity
  bool operator==(const CandidateAction&) const = default;
};

class ActionSampler {
 public:
  virtual ~ActionSampler() = default;
  virtual CandidateAction sample() = 0;
  /// Called once per gate step with the action that was executed.
  virtual void on_executed(const CandidateAction& action, bool retreated) {
    (void)action;
    (void)retreated;
  }
};

/// Proposals are one OU step from the current excitation state, passed
/// through min-norm and deadzone and scaled by v_scale. The state advances
/// only when a proposal is executed.
class OuActionSampler : public ActionSampler {
 public:
  OuActionSampler(OUParams<double> params, ExcitationConfig<double> cfg);

  CandidateAction sample() override;
  void on_executed(const CandidateAction& action, bool retreated) override;

 private:
  OUParams<double> params_;
  ExcitationConfig<double> cfg_;
  Rng rng_;
  OUState<double> state_;
  std::vector<std::pair<CandidateAction, OUState<double>>> pending_;
};

class ScriptedActionSampler : public ActionSampler {
 public:
  explicit ScriptedActionSampler(std::vector<CandidateAction> actions);
  CandidateAction sample() override;

 private:
  std::vector<CandidateAction> actions_;
  std::size_t next_ = 0;
};

/// Images handed to the judge for one candidate.
struct Rollout {
  Rgb8Image history;
  Rgb8Image future;
  Rgb8Image contact;
};

class RolloutProvider {
 public:
  virtual ~RolloutProvider() = default;
  /// Same history for every attempt of a step, fresh rollout per action.
  virtual Rollout imagine(const CandidateAction& action) = 0;
  virtual void on_executed(const CandidateAction& action, bool retreated) {
    (void)action;
    (void)retreated;
  }
};

/// Deterministic placeholder tiles whose colours encode the action.
class SyntheticRolloutProvider : public RolloutProvider {
 public:
  explicit SyntheticRolloutProvider(int tile_size = 32, int history_frames = 2, int future_frames = 8);
  Rollout imagine(const CandidateAction& action) override;

 private:
  int tile_size_;
  int history_frames_;
  int future_frames_;
};

/// Renders a token frame: each token is FSQ-dequantized, its first three
/// channels are mapped from [-1,1] to [0,1] and drawn as a scale x scale block.
/// Missing channels render as mid grey.
Rgb8Image render_token_frame(std::span<const tokens::Token> frame, int height, int width,
                             const tokens::FsqSpec& fsq, int scale);

struct ModelRolloutConfig {
  tokens::MaskSchedule schedule;
  std::vector<int> fsq_levels;  // product must equal the video vocabulary size
  int pixel_scale = 8;
  std::uint64_t seed = 0;
};

/// Imagines rollouts with the transformer and masked decoding. The candidate
/// action conditions every frame; history tokens come from `history` and
/// advance to the accepted rollout's last frames after each executed action.
class ModelRolloutProvider : public RolloutProvider {
 public:
  ModelRolloutProvider(dynamics::ModelConfig model_cfg, dynamics::ModelWeights<float> weights,
                       tokens::TokenGrid history, ModelRolloutConfig cfg);

  Rollout imagine(const CandidateAction& action) override;
  void on_executed(const CandidateAction& action, bool retreated) override;

  const tokens::TokenGrid& history() const { return history_; }

 private:
  dynamics::ModelPredictor<float> predictor_;
  tokens::TokenGrid history_;
  ModelRolloutConfig cfg_;
  tokens::FsqSpec fsq_;
  Rng rng_;
  std::vector<std::pair<CandidateAction, tokens::TokenGrid>> pending_;
};

struct GateConfig {
  int max_attempts = 3;
  CandidateAction retreat_action{Vector3d(0, 0, -0.25)};
  /// When set, a verdict with confidence >= threshold also rejects.
  std::optional<double> confidence_threshold;

  void validate() const;
};

GateConfig gate_config_from_json(const nlohmann::json& j);
nlohmann::json gate_config_to_json(const GateConfig& cfg);

struct AttemptRecord {
  int step = 0;
  int attempt = 0;
  CandidateAction action;
  std::optional<JudgeVerdict> verdict;
  std::string error;  // set when the rollout, judge call or parse failed
  double latency_ms = 0.0;
  bool accepted = false;
};

struct GateOutcome {
  CandidateAction action;
  bool retreated = false;
  std::vector<AttemptRecord> attempts;
};

/// True iff the verdict accepts the action under `cfg`.
bool accepts(const JudgeVerdict& verdict, const GateConfig& cfg);

GateOutcome gate_step(int step, ActionSampler& sampler, RolloutProvider& rollout, Judge& judge,
                      const GateConfig& cfg);

nlohmann::json attempt_to_json(const AttemptRecord& record);

}  // namespace dreamer::gate
