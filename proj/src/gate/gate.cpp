#include "dreamer/gate/gate.hpp"

#include <algorithm>
#include <cmath>

namespace dreamer::gate {

namespace {

Vector3d draw_normals(Rng& rng) {
  Vector3d v;
  for (int i = 0; i < 3; ++i) v[i] = rng.normal();
  return v;
}

nlohmann::json vec_json(const Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Vector3d vec_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw FormatError(std::string(what) + " must be an array of 3 numbers");
  Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

void fill_rect(Rgb8Image& img, int u0, int v0, int w, int h, const std::uint8_t rgb[3]) {
  for (int v = v0; v < v0 + h; ++v)
    for (int u = u0; u < u0 + w; ++u) std::copy(rgb, rgb + 3, img.pixel(u, v));
}

tokens::Token argmax_token(const Eigen::Ref<const VecX<double>>& row, const tokens::FactorizedVocab& vocab) {
  const int vf = static_cast<int>(vocab.factor_size());
  std::vector<std::uint32_t> digits(static_cast<std::size_t>(vocab.factors()));
  for (int k = 0; k < vocab.factors(); ++k) {
    Eigen::Index best = 0;
    row.segment(k * vf, vf).maxCoeff(&best);
    digits[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(best);
  }
  return vocab.compose(digits);
}

}  // namespace

OuActionSampler::OuActionSampler(OUParams<double> params, ExcitationConfig<double> cfg)
    : params_(std::move(params)), cfg_(std::move(cfg)), rng_(params_.seed), state_{params_.mu, 0} {
  params_.validate();
  cfg_.validate();
}

CandidateAction OuActionSampler::sample() {
  const OUState<double> next = step_ou(state_, params_, draw_normals(rng_));
  Vector3d fallback = Vector3d::UnitX();
  if (next.x.norm() == 0.0) {
    Vector3d d = draw_normals(rng_);
    while (d.norm() == 0.0) d = draw_normals(rng_);
    fallback = d.normalized();
  }
  const Vector3d shaped = apply_deadzone(enforce_min_norm(next.x, cfg_.m_min, fallback), cfg_.epsilon);
  CandidateAction action{cfg_.v_scale * shaped};
  pending_.emplace_back(action, next);
  return action;
}

void OuActionSampler::on_executed(const CandidateAction& action, bool retreated) {
  if (!retreated) {
    for (auto it = pending_.rbegin(); it != pending_.rend(); ++it)
      if (it->first == action) {
        state_ = it->second;
        break;
      }
  }
  pending_.clear();
}

ScriptedActionSampler::ScriptedActionSampler(std::vector<CandidateAction> actions) : actions_(std::move(actions)) {
  if (actions_.empty()) throw InvalidInput("scripted sampler needs at least one action");
}

CandidateAction ScriptedActionSampler::sample() { return actions_[next_++ % actions_.size()]; }

SyntheticRolloutProvider::SyntheticRolloutProvider(int tile_size, int history_frames, int future_frames)
    : tile_size_(tile_size), history_frames_(history_frames), future_frames_(future_frames) {
  if (tile_size < 1 || history_frames < 1 || future_frames < 1)
    throw InvalidInput("synthetic rollout sizes must be positive");
}

Rollout SyntheticRolloutProvider::imagine(const CandidateAction& action) {
  const int n = tile_size_;
  Rollout out;
  out.history = Rgb8Image(n * history_frames_, n);
  out.future = Rgb8Image(n * future_frames_, n);
  out.contact = Rgb8Image(n * future_frames_, n);
  const std::uint8_t grey[3] = {128, 128, 128};
  for (int f = 0; f < history_frames_; ++f) fill_rect(out.history, f * n, 0, n, n, grey);
  const double speed = action.v.norm();
  for (int f = 0; f < future_frames_; ++f) {
    const double shift = static_cast<double>(f + 1) / future_frames_;
    std::uint8_t rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = to_byte(0.5 + 0.5 * std::tanh(action.v[c] * shift * 4.0));
    fill_rect(out.future, f * n, 0, n, n, rgb);
    const std::uint8_t contact[3] = {to_byte(std::min(1.0, speed * shift)), 128, 128};
    fill_rect(out.contact, f * n, 0, n, n, contact);
  }
  return out;
}

Rgb8Image render_token_frame(std::span<const tokens::Token> frame, int height, int width,
                             const tokens::FsqSpec& fsq, int scale) {
  if (scale < 1) throw InvalidInput("pixel scale must be positive");
  if (frame.size() != static_cast<std::size_t>(height) * width) throw InvalidInput("token frame size mismatch");
  Rgb8Image img(width * scale, height * scale);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const tokens::Token z = frame[static_cast<std::size_t>(r) * width + c];
      std::uint8_t rgb[3] = {128, 128, 128};
      if (z < fsq.codebook_size()) {
        const VecX<double> latent = fsq.dequantize(z);
        for (int ch = 0; ch < std::min<int>(3, static_cast<int>(latent.size())); ++ch)
          rgb[ch] = to_byte((latent[ch] + 1.0) / 2.0);
      }
      fill_rect(img, c * scale, r * scale, scale, scale, rgb);
    }
  }
  return img;
}

ModelRolloutProvider::ModelRolloutProvider(dynamics::ModelConfig model_cfg, dynamics::ModelWeights<float> weights,
                                           tokens::TokenGrid history, ModelRolloutConfig cfg)
    : predictor_(std::move(model_cfg), std::move(weights)),
      history_(std::move(history)),
      cfg_(std::move(cfg)),
      fsq_(cfg_.fsq_levels),
      rng_(cfg_.seed) {
  const auto& mc = predictor_.config();
  cfg_.schedule.validate();
  history_.validate();
  if (history_.frames != mc.frames || history_.height != mc.grid_h || history_.width != mc.grid_w ||
      history_.vocab_size != mc.vocab.size())
    throw InvalidInput("history grid does not match the model config");
  if (history_.t_hist != mc.t_hist || mc.t_hist < 1 || mc.t_hist >= mc.frames)
    throw InvalidInput("rollout needs 1 <= t_hist < frames");
  if (fsq_.codebook_size() != mc.vocab.size()) throw InvalidInput("FSQ codebook size must equal the vocabulary size");
  for (int t = 0; t < history_.t_hist; ++t)
    for (int s = 0; s < history_.spatial(); ++s)
      if (history_.is_masked(t, s)) throw InvalidInput("history frames must be fully populated");
}

Rollout ModelRolloutProvider::imagine(const CandidateAction& action) {
  const auto& mc = predictor_.config();
  tokens::Conditioning cond;
  cond.actions = MatX<double>::Zero(mc.frames, 3);
  for (int t = 0; t < mc.frames; ++t) cond.actions.row(t) = action.v.transpose();
  cond.joints = MatX<double>::Zero(mc.frames, mc.joints);

  const int n_future = mc.frames - mc.t_hist;
  tokens::RolloutResult result = tokens::decode_rollout(predictor_, history_, n_future, cfg_.schedule, rng_, cond);

  const int S = mc.spatial();
  auto frame_span = [&](const tokens::TokenGrid& g, int t) {
    return std::span<const tokens::Token>(g.tokens.data() + g.index(t, 0), static_cast<std::size_t>(S));
  };
  std::vector<Rgb8Image> past, future, contact;
  for (int t = 0; t < mc.t_hist; ++t)
    past.push_back(render_token_frame(frame_span(history_, t), mc.grid_h, mc.grid_w, fsq_, cfg_.pixel_scale));
  for (int t = mc.t_hist; t < mc.frames; ++t) {
    future.push_back(render_token_frame(frame_span(result.grid, t), mc.grid_h, mc.grid_w, fsq_, cfg_.pixel_scale));
    const tokens::PredictorOutput out = predictor_.predict(result.grid, t, cond);
    std::vector<tokens::Token> contact_tokens(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s)
      contact_tokens[static_cast<std::size_t>(s)] = argmax_token(out.contact_logits.row(s).transpose(), mc.vocab);
    contact.push_back(render_token_frame(contact_tokens, mc.grid_h, mc.grid_w, fsq_, cfg_.pixel_scale));
  }
  pending_.emplace_back(action, result.grid);
  return {tile_row(past), tile_row(future), tile_row(contact)};
}

void ModelRolloutProvider::on_executed(const CandidateAction& action, bool retreated) {
  if (!retreated) {
    for (auto it = pending_.rbegin(); it != pending_.rend(); ++it) {
      if (!(it->first == action)) continue;
      const tokens::TokenGrid& rolled = it->second;
      const int shift = rolled.frames - history_.t_hist;
      tokens::TokenGrid next = history_;
      for (int t = 0; t < next.frames; ++t) {
        if (t < next.t_hist) {
          for (int s = 0; s < next.spatial(); ++s) next.at(t, s) = rolled.at(t + shift, s);
        } else {
          next.mask_frame(t);
        }
      }
      history_ = std::move(next);
      break;
    }
  }
  pending_.clear();
}

void GateConfig::validate() const {
  if (max_attempts < 1) throw InvalidInput("max_attempts must be at least 1");
  if (!retreat_action.v.allFinite()) throw InvalidInput("retreat action must be finite");
  if (confidence_threshold && !(*confidence_threshold >= 0.0 && *confidence_threshold <= 1.0))
    throw InvalidInput("confidence_threshold must lie in [0, 1]");
}

GateConfig gate_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("gate config must be a JSON object");
  GateConfig cfg;
  if (j.contains("max_attempts")) {
    if (!j["max_attempts"].is_number_integer()) throw FormatError("max_attempts must be an integer");
    cfg.max_attempts = j["max_attempts"].get<int>();
  }
  if (j.contains("retreat_action")) cfg.retreat_action.v = vec_from_json(j["retreat_action"], "retreat_action");
  if (j.contains("confidence_threshold") && !j["confidence_threshold"].is_null()) {
    if (!j["confidence_threshold"].is_number()) throw FormatError("confidence_threshold must be a number");
    cfg.confidence_threshold = j["confidence_threshold"].get<double>();
  }
  cfg.validate();
  return cfg;
}

nlohmann::json gate_config_to_json(const GateConfig& cfg) {
  nlohmann::json j = {{"max_attempts", cfg.max_attempts}, {"retreat_action", vec_json(cfg.retreat_action.v)}};
  j["confidence_threshold"] = cfg.confidence_threshold ? nlohmann::json(*cfg.confidence_threshold) : nlohmann::json();
  return j;
}

bool accepts(const JudgeVerdict& verdict, const GateConfig& cfg) {
  if (verdict.collision_likely) return false;
  if (cfg.confidence_threshold && verdict.confidence >= *cfg.confidence_threshold) return false;
  return true;
}

GateOutcome gate_step(int step, ActionSampler& sampler, RolloutProvider& rollout, Judge& judge,
                      const GateConfig& cfg) {
  cfg.validate();
  GateOutcome outcome;
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    AttemptRecord record;
    record.step = step;
    record.attempt = attempt;
    record.action = sampler.sample();
    try {
      const Rollout imagined = rollout.imagine(record.action);
      const JudgeRequest request = build_prompt(imagined.history, imagined.future, imagined.contact);
      const JudgeReply reply = judge.query(request);
      record.latency_ms = reply.latency_ms;
      record.verdict = parse_verdict(reply.raw);
      record.accepted = accepts(*record.verdict, cfg);
    } catch (const std::exception& e) {
      record.error = e.what();
      record.accepted = false;
    }
    outcome.attempts.push_back(record);
    if (record.accepted) {
      outcome.action = record.action;
      sampler.on_executed(outcome.action, false);
      rollout.on_executed(outcome.action, false);
      return outcome;
    }
  }
  outcome.action = cfg.retreat_action;
  outcome.retreated = true;
  sampler.on_executed(outcome.action, true);
  rollout.on_executed(outcome.action, true);
  return outcome;
}

nlohmann::json attempt_to_json(const AttemptRecord& record) {
  nlohmann::json j = {{"step", record.step}, {"attempt", record.attempt}, {"action", vec_json(record.action.v)}};
  if (record.verdict) j["verdict"] = verdict_to_json(*record.verdict);
  if (!record.error.empty()) j["error"] = record.error;
  j["accepted"] = record.accepted;
  j["latency_ms"] = record.latency_ms;
  return j;
}

}  // namespace dreamer::gate
