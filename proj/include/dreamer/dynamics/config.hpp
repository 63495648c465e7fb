#pragma once

#include "dreamer/tokens/vocab.hpp"

#include <json.hpp>

namespace dreamer::dynamics {

struct ModelConfig {
  int layers = 2;
  int hidden = 32;
  int heads = 4;
  int frames = 4;
  int t_hist = 2;
  int grid_h = 4;
  int grid_w = 4;
  tokens::FactorizedVocab vocab{16, 2};
  int joints = 4;
  double mlp_ratio = 4.0;
  bool mup = false;
  bool qk_norm = true;
  double dropout = 0.0;  // inference only; kept for config echo

  int spatial() const { return grid_h * grid_w; }
  int tokens_per_frame() const { return spatial() + 1; }  // control token first
  int head_dim() const { return hidden / heads; }
  int ff_hidden() const { return static_cast<int>(mlp_ratio * hidden); }
  int factored_logits() const { return vocab.factors() * static_cast<int>(vocab.factor_size()); }

  /// Attention logit scale: 8/d_k under muP, 1/sqrt(d_k) otherwise.
  double attention_scale() const;

  void validate() const;

  /// Full-scale defaults: L=24, D=256, 8 heads, T=16, 32x32 tokens, 2 x 256 vocab.
  static ModelConfig full_scale();
};

ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json model_config_to_json(const ModelConfig& cfg);

}  // namespace dreamer::dynamics
