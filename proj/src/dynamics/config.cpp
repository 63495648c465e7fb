#include "dreamer/dynamics/config.hpp"

#include <cmath>

namespace dreamer::dynamics {

double ModelConfig::attention_scale() const {
  const double dk = static_cast<double>(head_dim());
  return mup ? 8.0 / dk : 1.0 / std::sqrt(dk);
}

void ModelConfig::validate() const {
  if (layers < 0) throw InvalidInput("layers must be non-negative");
  if (hidden < 1 || heads < 1) throw InvalidInput("hidden and heads must be positive");
  if (hidden % heads != 0) throw InvalidInput("hidden dimension must be divisible by the head count");
  if (frames < 1) throw InvalidInput("frames must be positive");
  if (t_hist < 0 || t_hist >= frames) throw InvalidInput("t_hist must lie in [0, frames)");
  if (grid_h < 1 || grid_w < 1) throw InvalidInput("token grid must be at least 1x1");
  if (joints < 1) throw InvalidInput("joint channel count must be positive");
  if (!(mlp_ratio > 0.0) || ff_hidden() < 1) throw InvalidInput("mlp_ratio must give a positive FFN width");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("dropout must lie in [0, 1)");
}

ModelConfig ModelConfig::full_scale() {
  ModelConfig cfg;
  cfg.layers = 24;
  cfg.hidden = 256;
  cfg.heads = 8;
  cfg.frames = 16;
  cfg.t_hist = 8;
  cfg.grid_h = 32;
  cfg.grid_w = 32;
  cfg.vocab = tokens::FactorizedVocab(256, 2);
  cfg.joints = 4;
  return cfg;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("model config must be a JSON object");
  ModelConfig cfg;
  auto read_int = [&](const char* key, int& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw FormatError(std::string("model config '") + key + "' must be an integer");
    dst = j[key].get<int>();
  };
  read_int("layers", cfg.layers);
  read_int("hidden", cfg.hidden);
  read_int("heads", cfg.heads);
  read_int("frames", cfg.frames);
  read_int("t_hist", cfg.t_hist);
  read_int("grid_h", cfg.grid_h);
  read_int("grid_w", cfg.grid_w);
  read_int("joints", cfg.joints);
  int vf = static_cast<int>(cfg.vocab.factor_size());
  int k = cfg.vocab.factors();
  read_int("factor_size", vf);
  read_int("factors", k);
  if (vf < 2) throw FormatError("factor_size must be >= 2");
  cfg.vocab = tokens::FactorizedVocab(static_cast<std::uint32_t>(vf), k);
  if (j.contains("mlp_ratio")) cfg.mlp_ratio = j["mlp_ratio"].get<double>();
  if (j.contains("dropout")) cfg.dropout = j["dropout"].get<double>();
  if (j.contains("mup")) cfg.mup = j["mup"].get<bool>();
  if (j.contains("qk_norm")) cfg.qk_norm = j["qk_norm"].get<bool>();
  cfg.validate();
  return cfg;
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  return {{"layers", cfg.layers},
          {"hidden", cfg.hidden},
          {"heads", cfg.heads},
          {"frames", cfg.frames},
          {"t_hist", cfg.t_hist},
          {"grid_h", cfg.grid_h},
          {"grid_w", cfg.grid_w},
          {"factor_size", cfg.vocab.factor_size()},
          {"factors", cfg.vocab.factors()},
          {"joints", cfg.joints},
          {"mlp_ratio", cfg.mlp_ratio},
          {"mup", cfg.mup},
          {"qk_norm", cfg.qk_norm},
          {"dropout", cfg.dropout}};
}

}  // namespace dreamer::dynamics
