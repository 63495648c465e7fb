#pragma once

#include "dreamer/dynamics/model.hpp"
#include "dreamer/tokens/maskgit.hpp"

namespace dreamer::dynamics {

/// Adapts the transformer to the decoding Predictor interface. Missing
/// actions or joints in the conditioning are treated as zeros.
template <typename Scalar>
class ModelPredictor : public tokens::Predictor {
 public:
  ModelPredictor(ModelConfig cfg, ModelWeights<Scalar> weights)
      : cfg_(std::move(cfg)), weights_(std::move(weights)) {
    weights_.validate(cfg_);
  }

  const tokens::FactorizedVocab& vocab() const override { return cfg_.vocab; }
  const ModelConfig& config() const { return cfg_; }
  const ModelWeights<Scalar>& weights() const { return weights_; }

  tokens::PredictorOutput predict(const tokens::TokenGrid& grid, int t, const tokens::Conditioning& cond) override {
    if (t < 0 || t >= cfg_.frames) throw InvalidInput("predict: frame out of range");
    const MatX<Scalar> actions = cond.actions.size() ? MatX<Scalar>(cond.actions.template cast<Scalar>())
                                                     : MatX<Scalar>(MatX<Scalar>::Zero(cfg_.frames, 3));
    const MatX<Scalar> joints = cond.joints.size() ? MatX<Scalar>(cond.joints.template cast<Scalar>())
                                                   : MatX<Scalar>(MatX<Scalar>::Zero(cfg_.frames, cfg_.joints));
    const ForwardOutput<Scalar> out = forward<Scalar>(grid, actions, joints, weights_, cfg_);
    const int S = cfg_.spatial();
    tokens::PredictorOutput result;
    result.video_logits = out.video_logits.middleRows(t * S, S).template cast<double>();
    result.contact_logits = out.contact_logits.middleRows(t * S, S).template cast<double>();
    result.joints = out.joint_pred.row(t).transpose().template cast<double>();
    return result;
  }

 private:
  ModelConfig cfg_;
  ModelWeights<Scalar> weights_;
};

}  // namespace dreamer::dynamics
