#pragma once

// Forward-only spatial-temporal transformer over factorized video tokens.
//
// Activations are (T * (S+1)) x D row-major matrices; row t*(S+1) is the
// control token of frame t and rows t*(S+1)+1+s are its video tokens.

#include "dreamer/dynamics/config.hpp"
#include "dreamer/random.hpp"
#include "dreamer/tokens/grid.hpp"

#include <string>
#include <vector>

namespace dreamer::dynamics {

template <typename Scalar>
struct LayerNormWeights {
  VecX<Scalar> gamma;
  VecX<Scalar> beta;
};

template <typename Scalar>
struct AttentionWeights {
  MatX<Scalar> wq, wk, wv, wo;  // D x D, applied as x * W
  LayerNormWeights<Scalar> q_norm, k_norm;  // over the head dimension, shared across heads
};

template <typename Scalar>
struct FeedForwardWeights {
  MatX<Scalar> w1;  // D x D_ff
  VecX<Scalar> b1;
  MatX<Scalar> w2;  // D_ff x D
  VecX<Scalar> b2;
};

template <typename Scalar>
struct BlockWeights {
  LayerNormWeights<Scalar> spatial_norm;
  AttentionWeights<Scalar> spatial;
  AttentionWeights<Scalar> temporal;
  LayerNormWeights<Scalar> ffn_norm;
  FeedForwardWeights<Scalar> ffn;
};

template <typename Scalar>
struct ModelWeights {
  std::vector<MatX<Scalar>> factor_embeddings;  // k tables of v_f x D
  VecX<Scalar> mask_embedding;                  // D
  MatX<Scalar> action_proj;                     // 3 x D
  VecX<Scalar> action_bias;
  LayerNormWeights<Scalar> action_norm;
  MatX<Scalar> joint_proj;  // N_j x D
  VecX<Scalar> joint_bias;
  LayerNormWeights<Scalar> joint_norm;
  MatX<Scalar> positional;  // T*(S+1) x D
  std::vector<BlockWeights<Scalar>> blocks;
  MatX<Scalar> video_head;    // D x k*v_f
  MatX<Scalar> contact_head;  // D x k*v_f
  MatX<Scalar> joint_head;    // D x N_j

  /// Seeded init: embeddings ~ N(0, 0.02^2), projections ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
  /// norms gamma = 1 / beta = 0, biases 0.
  static ModelWeights init(const ModelConfig& cfg, std::uint64_t seed);

  /// Throws InvalidInput unless every tensor matches `cfg` and is finite.
  void validate(const ModelConfig& cfg) const;

  /// Zeroes every attention and FFN output projection (wo, w2, b2).
  void zero_residual_branches();

  /// Visits every tensor with a stable name, in a fixed order.
  template <typename Fn>
  void for_each_tensor(Fn&& fn);
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const;

  template <typename Other>
  ModelWeights<Other> cast() const;
};

template <typename Scalar>
struct ForwardOutput {
  MatX<Scalar> video_logits;    // (T*S) x (k*v_f), row t*S+s
  MatX<Scalar> contact_logits;  // (T*S) x (k*v_f)
  MatX<Scalar> joint_pred;      // T x N_j
};

/// LayerNorm over each row, eps = 1e-5 inside the square root.
template <typename Scalar>
MatX<Scalar> layer_norm(const MatX<Scalar>& x, const LayerNormWeights<Scalar>& w);

template <typename Scalar>
Scalar gelu(Scalar x);

/// Multi-head self-attention over the N rows of x. When `probs` is non-null
/// it receives one N x N attention matrix per head.
template <typename Scalar>
MatX<Scalar> attention(const MatX<Scalar>& x, const AttentionWeights<Scalar>& w, bool causal, const ModelConfig& cfg,
                       std::vector<MatX<Scalar>>* probs = nullptr);

template <typename Scalar>
MatX<Scalar> feed_forward(const MatX<Scalar>& x, const FeedForwardWeights<Scalar>& w);

/// Token, mask and control embeddings plus positional embedding.
/// actions: T x 3, joints: T x N_j.
template <typename Scalar>
MatX<Scalar> embed_inputs(const tokens::TokenGrid& grid, const MatX<Scalar>& actions, const MatX<Scalar>& joints,
                          const ModelWeights<Scalar>& w, const ModelConfig& cfg);

/// X1 = X + SpatialAttn(Norm(X)) per frame, X2 = X1 + causal TemporalAttn(X1)
/// per token slot, X3 = X2 + FFN(Norm(X2)).
template <typename Scalar>
MatX<Scalar> st_block(const MatX<Scalar>& x, const BlockWeights<Scalar>& w, const ModelConfig& cfg);

template <typename Scalar>
ForwardOutput<Scalar> forward(const tokens::TokenGrid& grid, const MatX<Scalar>& actions, const MatX<Scalar>& joints,
                              const ModelWeights<Scalar>& w, const ModelConfig& cfg);

// ---------------------------------------------------------------------------

namespace detail {

inline std::string block_prefix(std::size_t l) { return "blocks." + std::to_string(l) + "."; }

template <typename Norm, typename Fn>
void visit_norm(Norm& n, const std::string& name, Fn& fn) {
  fn(name + ".gamma", n.gamma);
  fn(name + ".beta", n.beta);
}

template <typename Attn, typename Fn>
void visit_attention(Attn& a, const std::string& name, Fn& fn) {
  fn(name + ".wq", a.wq);
  fn(name + ".wk", a.wk);
  fn(name + ".wv", a.wv);
  fn(name + ".wo", a.wo);
  visit_norm(a.q_norm, name + ".q_norm", fn);
  visit_norm(a.k_norm, name + ".k_norm", fn);
}

template <typename Weights, typename Fn>
void visit_all(Weights& w, Fn& fn) {
  for (std::size_t k = 0; k < w.factor_embeddings.size(); ++k)
    fn("embed.factor." + std::to_string(k), w.factor_embeddings[k]);
  fn("embed.mask", w.mask_embedding);
  fn("control.action.proj", w.action_proj);
  fn("control.action.bias", w.action_bias);
  visit_norm(w.action_norm, "control.action.norm", fn);
  fn("control.joint.proj", w.joint_proj);
  fn("control.joint.bias", w.joint_bias);
  visit_norm(w.joint_norm, "control.joint.norm", fn);
  fn("embed.positional", w.positional);
  for (std::size_t l = 0; l < w.blocks.size(); ++l) {
    auto& b = w.blocks[l];
    const std::string p = block_prefix(l);
    visit_norm(b.spatial_norm, p + "spatial_norm", fn);
    visit_attention(b.spatial, p + "spatial", fn);
    visit_attention(b.temporal, p + "temporal", fn);
    visit_norm(b.ffn_norm, p + "ffn_norm", fn);
    fn(p + "ffn.w1", b.ffn.w1);
    fn(p + "ffn.b1", b.ffn.b1);
    fn(p + "ffn.w2", b.ffn.w2);
    fn(p + "ffn.b2", b.ffn.b2);
  }
  fn("head.video", w.video_head);
  fn("head.contact", w.contact_head);
  fn("head.joint", w.joint_head);
}

}  // namespace detail

template <typename Scalar>
template <typename Fn>
void ModelWeights<Scalar>::for_each_tensor(Fn&& fn) {
  detail::visit_all(*this, fn);
}

template <typename Scalar>
template <typename Fn>
void ModelWeights<Scalar>::for_each_tensor(Fn&& fn) const {
  detail::visit_all(*this, fn);
}

template <typename Scalar>
template <typename Other>
ModelWeights<Other> ModelWeights<Scalar>::cast() const {
  ModelWeights<Other> out;
  out.factor_embeddings.resize(factor_embeddings.size());
  out.blocks.resize(blocks.size());
  // Both visits walk the same names in the same order.
  std::vector<const void*> sources;
  for_each_tensor([&](const std::string&, const auto& t) { sources.push_back(&t); });
  std::size_t i = 0;
  out.for_each_tensor([&](const std::string&, auto& t) {
    using Dst = std::decay_t<decltype(t)>;
    if constexpr (Dst::ColsAtCompileTime == 1) {
      t = static_cast<const VecX<Scalar>*>(sources[i++])->template cast<Other>();
    } else {
      t = static_cast<const MatX<Scalar>*>(sources[i++])->template cast<Other>();
    }
  });
  return out;
}

}  // namespace dreamer::dynamics
