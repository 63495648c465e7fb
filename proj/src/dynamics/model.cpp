#include "dreamer/dynamics/model.hpp"

#include <cmath>
#include <limits>

namespace dreamer::dynamics {

namespace {

template <typename Scalar>
MatX<Scalar> uniform_init(Rng& rng, int rows, int cols, int fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  MatX<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>((2.0 * rng.uniform01() - 1.0) * bound);
  return m;
}

template <typename Scalar>
MatX<Scalar> normal_init(Rng& rng, int rows, int cols, double stddev) {
  MatX<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(stddev * rng.normal());
  return m;
}

template <typename Scalar>
LayerNormWeights<Scalar> unit_norm(int dim) {
  return {VecX<Scalar>::Ones(dim), VecX<Scalar>::Zero(dim)};
}

template <typename Scalar>
AttentionWeights<Scalar> init_attention(Rng& rng, const ModelConfig& cfg) {
  const int d = cfg.hidden;
  AttentionWeights<Scalar> a;
  a.wq = uniform_init<Scalar>(rng, d, d, d);
  a.wk = uniform_init<Scalar>(rng, d, d, d);
  a.wv = uniform_init<Scalar>(rng, d, d, d);
  a.wo = uniform_init<Scalar>(rng, d, d, d);
  a.q_norm = unit_norm<Scalar>(cfg.head_dim());
  a.k_norm = unit_norm<Scalar>(cfg.head_dim());
  return a;
}

void expect_shape(const std::string& name, Eigen::Index rows, Eigen::Index cols, Eigen::Index want_rows,
                  Eigen::Index want_cols) {
  if (rows != want_rows || cols != want_cols)
    throw InvalidInput("tensor " + name + " has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                       ", expected " + std::to_string(want_rows) + "x" + std::to_string(want_cols));
}

}  // namespace

template <typename Scalar>
ModelWeights<Scalar> ModelWeights<Scalar>::init(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const int d = cfg.hidden;
  const int vf = static_cast<int>(cfg.vocab.factor_size());
  ModelWeights w;
  for (int k = 0; k < cfg.vocab.factors(); ++k) w.factor_embeddings.push_back(normal_init<Scalar>(rng, vf, d, 0.02));
  w.mask_embedding = normal_init<Scalar>(rng, d, 1, 0.02);
  w.action_proj = uniform_init<Scalar>(rng, 3, d, 3);
  w.action_bias = VecX<Scalar>::Zero(d);
  w.action_norm = unit_norm<Scalar>(d);
  w.joint_proj = uniform_init<Scalar>(rng, cfg.joints, d, cfg.joints);
  w.joint_bias = VecX<Scalar>::Zero(d);
  w.joint_norm = unit_norm<Scalar>(d);
  w.positional = normal_init<Scalar>(rng, cfg.frames * cfg.tokens_per_frame(), d, 0.02);
  for (int l = 0; l < cfg.layers; ++l) {
    BlockWeights<Scalar> b;
    b.spatial_norm = unit_norm<Scalar>(d);
    b.spatial = init_attention<Scalar>(rng, cfg);
    b.temporal = init_attention<Scalar>(rng, cfg);
    b.ffn_norm = unit_norm<Scalar>(d);
    b.ffn.w1 = uniform_init<Scalar>(rng, d, cfg.ff_hidden(), d);
    b.ffn.b1 = VecX<Scalar>::Zero(cfg.ff_hidden());
    b.ffn.w2 = uniform_init<Scalar>(rng, cfg.ff_hidden(), d, cfg.ff_hidden());
    b.ffn.b2 = VecX<Scalar>::Zero(d);
    w.blocks.push_back(std::move(b));
  }
  w.video_head = uniform_init<Scalar>(rng, d, cfg.factored_logits(), d);
  w.contact_head = uniform_init<Scalar>(rng, d, cfg.factored_logits(), d);
  w.joint_head = uniform_init<Scalar>(rng, d, cfg.joints, d);
  return w;
}

template <typename Scalar>
void ModelWeights<Scalar>::validate(const ModelConfig& cfg) const {
  cfg.validate();
  if (factor_embeddings.size() != static_cast<std::size_t>(cfg.vocab.factors()))
    throw InvalidInput("factor embedding count does not match the vocabulary");
  if (blocks.size() != static_cast<std::size_t>(cfg.layers)) throw InvalidInput("block count does not match layers");
  const int d = cfg.hidden;
  const int vf = static_cast<int>(cfg.vocab.factor_size());
  const int dk = cfg.head_dim();
  const int ff = cfg.ff_hidden();
  for_each_tensor([&](const std::string& name, const auto& t) {
    if (!t.allFinite()) throw InvalidInput("tensor " + name + " is not finite");
    Eigen::Index r = d;
    Eigen::Index c = 1;
    auto ends = [&](const char* suffix) {
      const std::string s(suffix);
      return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (name.rfind("embed.factor.", 0) == 0) { r = vf; c = d; }
    else if (name == "control.action.proj") { r = 3; c = d; }
    else if (name == "control.joint.proj") { r = cfg.joints; c = d; }
    else if (name == "embed.positional") { r = cfg.frames * cfg.tokens_per_frame(); c = d; }
    else if (name == "head.video" || name == "head.contact") { r = d; c = cfg.factored_logits(); }
    else if (name == "head.joint") { r = d; c = cfg.joints; }
    else if (ends("_norm.gamma") || ends("_norm.beta")) { r = (name.find(".q_norm") != std::string::npos || name.find(".k_norm") != std::string::npos) ? dk : d; }
    else if (ends(".wq") || ends(".wk") || ends(".wv") || ends(".wo")) { r = d; c = d; }
    else if (ends("ffn.w1")) { r = d; c = ff; }
    else if (ends("ffn.b1")) { r = ff; }
    else if (ends("ffn.w2")) { r = ff; c = d; }
    expect_shape(name, t.rows(), t.cols(), r, c);
  });
}

template <typename Scalar>
void ModelWeights<Scalar>::zero_residual_branches() {
  for (auto& b : blocks) {
    b.spatial.wo.setZero();
    b.temporal.wo.setZero();
    b.ffn.w2.setZero();
    b.ffn.b2.setZero();
  }
}

template <typename Scalar>
MatX<Scalar> layer_norm(const MatX<Scalar>& x, const LayerNormWeights<Scalar>& w) {
  constexpr Scalar kEps = Scalar(1e-5);
  MatX<Scalar> out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const Scalar mean = row.mean();
    const auto centered = (row.array() - mean).eval();
    const Scalar var = centered.square().mean();
    out.row(i) = (centered / std::sqrt(var + kEps)) * w.gamma.transpose().array() + w.beta.transpose().array();
  }
  return out;
}

template <typename Scalar>
Scalar gelu(Scalar x) {
  return Scalar(0.5) * x * (Scalar(1) + std::erf(x / std::sqrt(Scalar(2))));
}

template <typename Scalar>
MatX<Scalar> attention(const MatX<Scalar>& x, const AttentionWeights<Scalar>& w, bool causal, const ModelConfig& cfg,
                       std::vector<MatX<Scalar>>* probs) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw InvalidInput("attention needs at least one token");
  const int dk = cfg.head_dim();
  const Scalar scale = static_cast<Scalar>(cfg.attention_scale());
  const MatX<Scalar> q_all = x * w.wq;
  const MatX<Scalar> k_all = x * w.wk;
  const MatX<Scalar> v_all = x * w.wv;
  MatX<Scalar> concat(n, cfg.hidden);
  if (probs != nullptr) probs->assign(static_cast<std::size_t>(cfg.heads), MatX<Scalar>::Zero(n, n));

  for (int h = 0; h < cfg.heads; ++h) {
    MatX<Scalar> q = q_all.middleCols(h * dk, dk);
    MatX<Scalar> k = k_all.middleCols(h * dk, dk);
    const MatX<Scalar> v = v_all.middleCols(h * dk, dk);
    if (cfg.qk_norm) {
      q = layer_norm(q, w.q_norm);
      k = layer_norm(k, w.k_norm);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      // Causal rows only ever touch keys 0..i.
      const Eigen::Index visible = causal ? i + 1 : n;
      VecX<Scalar> logits = (k.topRows(visible) * q.row(i).transpose()) * scale;
      const Scalar max = logits.maxCoeff();
      VecX<Scalar> p = (logits.array() - max).exp();
      p /= p.sum();
      concat.row(i).segment(h * dk, dk) = p.transpose() * v.topRows(visible);
      if (probs != nullptr) (*probs)[static_cast<std::size_t>(h)].row(i).head(visible) = p.transpose();
    }
  }
  return concat * w.wo;
}

template <typename Scalar>
MatX<Scalar> feed_forward(const MatX<Scalar>& x, const FeedForwardWeights<Scalar>& w) {
  MatX<Scalar> hidden = (x * w.w1).rowwise() + w.b1.transpose();
  hidden = hidden.unaryExpr([](Scalar v) { return gelu(v); });
  return (hidden * w.w2).rowwise() + w.b2.transpose();
}

template <typename Scalar>
MatX<Scalar> embed_inputs(const tokens::TokenGrid& grid, const MatX<Scalar>& actions, const MatX<Scalar>& joints,
                          const ModelWeights<Scalar>& w, const ModelConfig& cfg) {
  grid.validate();
  if (grid.frames != cfg.frames || grid.height != cfg.grid_h || grid.width != cfg.grid_w)
    throw InvalidInput("token grid shape does not match the model config");
  if (grid.vocab_size != cfg.vocab.size()) throw InvalidInput("token grid vocabulary does not match the model");
  if (actions.rows() != cfg.frames || actions.cols() != 3) throw InvalidInput("actions must be T x 3");
  if (joints.rows() != cfg.frames || joints.cols() != cfg.joints) throw InvalidInput("joints must be T x N_j");

  const int per_frame = cfg.tokens_per_frame();
  MatX<Scalar> x(cfg.frames * per_frame, cfg.hidden);

  const MatX<Scalar> action_tokens = layer_norm<Scalar>((actions * w.action_proj).rowwise() + w.action_bias.transpose(),
                                                        w.action_norm);
  const MatX<Scalar> joint_tokens = layer_norm<Scalar>((joints * w.joint_proj).rowwise() + w.joint_bias.transpose(),
                                                       w.joint_norm);
  std::vector<std::uint32_t> digits(static_cast<std::size_t>(cfg.vocab.factors()));
  for (int t = 0; t < cfg.frames; ++t) {
    x.row(t * per_frame) = action_tokens.row(t) + joint_tokens.row(t);
    for (int s = 0; s < cfg.spatial(); ++s) {
      auto row = x.row(t * per_frame + 1 + s);
      const tokens::Token z = grid.at(t, s);
      if (z == grid.mask_token()) {
        row = w.mask_embedding.transpose();
        continue;
      }
      cfg.vocab.decompose(z, digits);
      row.setZero();
      for (std::size_t k = 0; k < digits.size(); ++k)
        row += w.factor_embeddings[k].row(static_cast<Eigen::Index>(digits[k]));
    }
  }
  return x + w.positional;
}

template <typename Scalar>
MatX<Scalar> st_block(const MatX<Scalar>& x, const BlockWeights<Scalar>& w, const ModelConfig& cfg) {
  const int per_frame = cfg.tokens_per_frame();
  if (x.rows() != cfg.frames * per_frame || x.cols() != cfg.hidden) throw InvalidInput("st_block input shape mismatch");

  MatX<Scalar> x1 = x;
  for (int t = 0; t < cfg.frames; ++t) {
    const MatX<Scalar> frame = x.middleRows(t * per_frame, per_frame);
    x1.middleRows(t * per_frame, per_frame) += attention<Scalar>(layer_norm(frame, w.spatial_norm), w.spatial, false, cfg);
  }

  MatX<Scalar> x2 = x1;
  MatX<Scalar> slot(cfg.frames, cfg.hidden);
  for (int p = 0; p < per_frame; ++p) {
    for (int t = 0; t < cfg.frames; ++t) slot.row(t) = x1.row(t * per_frame + p);
    const MatX<Scalar> mixed = attention<Scalar>(slot, w.temporal, true, cfg);
    for (int t = 0; t < cfg.frames; ++t) x2.row(t * per_frame + p) += mixed.row(t);
  }

  return x2 + feed_forward<Scalar>(layer_norm(x2, w.ffn_norm), w.ffn);
}

template <typename Scalar>
ForwardOutput<Scalar> forward(const tokens::TokenGrid& grid, const MatX<Scalar>& actions, const MatX<Scalar>& joints,
                              const ModelWeights<Scalar>& w, const ModelConfig& cfg) {
  MatX<Scalar> x = embed_inputs(grid, actions, joints, w, cfg);
  for (const auto& block : w.blocks) x = st_block(x, block, cfg);

  const int per_frame = cfg.tokens_per_frame();
  const int S = cfg.spatial();
  MatX<Scalar> video(cfg.frames * S, cfg.hidden);
  MatX<Scalar> control(cfg.frames, cfg.hidden);
  for (int t = 0; t < cfg.frames; ++t) {
    control.row(t) = x.row(t * per_frame);
    video.middleRows(t * S, S) = x.middleRows(t * per_frame + 1, S);
  }
  return {video * w.video_head, video * w.contact_head, control * w.joint_head};
}

#define DREAMER_INSTANTIATE(Scalar)                                                                                 \
  template struct ModelWeights<Scalar>;                                                                             \
  template MatX<Scalar> layer_norm(const MatX<Scalar>&, const LayerNormWeights<Scalar>&);                           \
  template Scalar gelu(Scalar);                                                                                     \
  template MatX<Scalar> attention(const MatX<Scalar>&, const AttentionWeights<Scalar>&, bool, const ModelConfig&,   \
                                  std::vector<MatX<Scalar>>*);                                                      \
  template MatX<Scalar> feed_forward(const MatX<Scalar>&, const FeedForwardWeights<Scalar>&);                       \
  template MatX<Scalar> embed_inputs(const tokens::TokenGrid&, const MatX<Scalar>&, const MatX<Scalar>&,            \
                                     const ModelWeights<Scalar>&, const ModelConfig&);                              \
  template MatX<Scalar> st_block(const MatX<Scalar>&, const BlockWeights<Scalar>&, const ModelConfig&);             \
  template ForwardOutput<Scalar> forward(const tokens::TokenGrid&, const MatX<Scalar>&, const MatX<Scalar>&,        \
                                         const ModelWeights<Scalar>&, const ModelConfig&);

DREAMER_INSTANTIATE(float)
DREAMER_INSTANTIATE(double)

#undef DREAMER_INSTANTIATE

}  // namespace dreamer::dynamics
