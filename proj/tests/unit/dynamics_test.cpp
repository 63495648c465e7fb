#include "dreamer/dynamics/checkpoint.hpp"
#include "dreamer/dynamics/losses.hpp"
#include "dreamer/dynamics/predictor.hpp"
#include "dreamer/tokens/grid_io.hpp"

#include "../support/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace dreamer;
using namespace dreamer::dynamics;
using tokens::TokenGrid;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 16;
  cfg.heads = 2;
  cfg.frames = 4;
  cfg.t_hist = 2;
  cfg.grid_h = 2;
  cfg.grid_w = 3;
  cfg.vocab = tokens::FactorizedVocab(8, 2);
  cfg.joints = 3;
  return cfg;
}

struct Inputs {
  TokenGrid grid;
  MatX<double> actions;
  MatX<double> joints;
};

Inputs random_inputs(Rng& rng, const ModelConfig& cfg) {
  Inputs in{tokens::random_grid(rng, cfg.frames, cfg.grid_h, cfg.grid_w, cfg.t_hist, cfg.vocab),
            MatX<double>(cfg.frames, 3), MatX<double>(cfg.frames, cfg.joints)};
  for (Eigen::Index i = 0; i < in.actions.size(); ++i) in.actions.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < in.joints.size(); ++i) in.joints.data()[i] = rng.normal();
  return in;
}

ForwardOutput<double> run(const Inputs& in, const ModelWeights<double>& w, const ModelConfig& cfg) {
  return forward<double>(in.grid, in.actions, in.joints, w, cfg);
}

}  // namespace

TEST_CASE("forward output shapes") {
  const ModelConfig cfg = small_config();
  const auto w = ModelWeights<double>::init(cfg, 1);
  Rng rng(2);
  const auto out = run(random_inputs(rng, cfg), w, cfg);
  CHECK(out.video_logits.rows() == 4 * 6);
  CHECK(out.video_logits.cols() == 16);
  CHECK(out.contact_logits.rows() == 24);
  CHECK(out.contact_logits.cols() == 16);
  CHECK(out.joint_pred.rows() == 4);
  CHECK(out.joint_pred.cols() == 3);
  CHECK(out.video_logits.allFinite());
}

TEST_CASE("property: outputs at frame t do not depend on frames after t") {
  const ModelConfig cfg = small_config();
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto w = ModelWeights<double>::init(cfg, rng.next());
    const Inputs a = random_inputs(rng, cfg);
    const int t = static_cast<int>(testgen::uniform_int(rng, 0, cfg.frames - 2));
    Inputs b = a;
    const Inputs noise = random_inputs(rng, cfg);
    for (int tp = t + 1; tp < cfg.frames; ++tp) {
      for (int s = 0; s < cfg.spatial(); ++s) b.grid.at(tp, s) = noise.grid.at(tp, s);
      b.actions.row(tp) = noise.actions.row(tp);
      b.joints.row(tp) = noise.joints.row(tp);
    }
    b.grid.mask_frame(cfg.frames - 1);
    const auto oa = run(a, w, cfg), ob = run(b, w, cfg);
    const int S = cfg.spatial();
    CHECK(oa.video_logits.topRows((t + 1) * S) == ob.video_logits.topRows((t + 1) * S));
    CHECK(oa.contact_logits.topRows((t + 1) * S) == ob.contact_logits.topRows((t + 1) * S));
    CHECK(oa.joint_pred.topRows(t + 1) == ob.joint_pred.topRows(t + 1));
    CHECK(oa.video_logits.bottomRows(S) != ob.video_logits.bottomRows(S));
  }
}

TEST_CASE("attention rows sum to one and causal rows ignore later keys") {
  ModelConfig cfg = small_config();
  const auto w = ModelWeights<double>::init(cfg, 4);
  Rng rng(5);
  MatX<double> x(7, cfg.hidden);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (bool causal : {false, true}) {
    std::vector<MatX<double>> probs;
    attention<double>(x, w.blocks[0].temporal, causal, cfg, &probs);
    REQUIRE(probs.size() == 2);
    for (const auto& p : probs) {
      for (Eigen::Index i = 0; i < 7; ++i) {
        CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((p.row(i).array() >= 0).all());
        if (causal)
          for (Eigen::Index j = i + 1; j < 7; ++j) CHECK(p(i, j) == 0.0);
        else
          CHECK((p.row(i).array() > 0).all());
      }
    }
  }
}

TEST_CASE("QK-norm makes attention invariant to scaling W_q and W_k") {
  ModelConfig cfg = small_config();
  const auto w = ModelWeights<double>::init(cfg, 6);
  Rng rng(7);
  MatX<double> x(5, cfg.hidden);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  // The LayerNorm eps is comparable to the unscaled q/k variance, so compare
  // two scalings where it is negligible.
  auto base_w = w.blocks[0].spatial;
  base_w.wq *= 10.0;
  base_w.wk *= 10.0;
  auto scaled = w.blocks[0].spatial;
  scaled.wq *= 1000.0;
  scaled.wk *= 40.0;
  const MatX<double> base = attention<double>(x, base_w, false, cfg);
  CHECK((attention<double>(x, scaled, false, cfg) - base).cwiseAbs().maxCoeff() < 1e-5);

  cfg.qk_norm = false;
  const MatX<double> plain = attention<double>(x, w.blocks[0].spatial, false, cfg);
  CHECK((attention<double>(x, scaled, false, cfg) - plain).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("muP attention scale equals 1/sqrt(d_k) only at d_k = 64") {
  ModelConfig a = small_config();
  a.hidden = 128;
  a.heads = 2;  // d_k = 64
  ModelConfig b = a;
  b.mup = true;
  CHECK(a.attention_scale() == b.attention_scale());
  const auto w = ModelWeights<double>::init(a, 8);
  Rng rng(9);
  MatX<double> x(4, 128);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  CHECK(attention<double>(x, w.blocks[0].spatial, false, a) == attention<double>(x, w.blocks[0].spatial, false, b));

  a.heads = 4;  // d_k = 32
  b.heads = 4;
  const auto w32 = ModelWeights<double>::init(a, 8);
  CHECK(b.attention_scale() == doctest::Approx(0.25));
  CHECK(a.attention_scale() == doctest::Approx(1 / std::sqrt(32.0)));
  CHECK(attention<double>(x, w32.blocks[0].spatial, false, a) != attention<double>(x, w32.blocks[0].spatial, false, b));
}

TEST_CASE("zeroed residual branches make every block the identity") {
  const ModelConfig cfg = small_config();
  auto w = ModelWeights<double>::init(cfg, 10);
  w.zero_residual_branches();
  Rng rng(11);
  const Inputs in = random_inputs(rng, cfg);
  const MatX<double> x = embed_inputs<double>(in.grid, in.actions, in.joints, w, cfg);
  CHECK(st_block<double>(x, w.blocks[0], cfg) == x);
  CHECK(st_block<double>(x, w.blocks[1], cfg) == x);
}

TEST_CASE("embedding lookup matches the factor tables") {
  const ModelConfig cfg = small_config();
  const auto w = ModelWeights<double>::init(cfg, 12);
  Rng rng(13);
  Inputs in = random_inputs(rng, cfg);
  in.grid.at(3, 4) = in.grid.mask_token();
  const MatX<double> x = embed_inputs<double>(in.grid, in.actions, in.joints, w, cfg);
  const int per = cfg.tokens_per_frame();
  for (int t = 0; t < cfg.frames; ++t)
    for (int s = 0; s < cfg.spatial(); ++s) {
      const int row = t * per + 1 + s;
      VecX<double> expect;
      if (in.grid.is_masked(t, s)) {
        expect = w.mask_embedding;
      } else {
        const auto d = cfg.vocab.decompose(in.grid.at(t, s));
        expect = (w.factor_embeddings[0].row(d[0]) + w.factor_embeddings[1].row(d[1])).transpose();
      }
      expect += w.positional.row(row).transpose();
      CHECK((x.row(row).transpose() - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("all-MASK frames embed as the mask vector and zero controls embed to zero") {
  const ModelConfig cfg = small_config();
  const auto w = ModelWeights<double>::init(cfg, 14);
  TokenGrid g(cfg.frames, cfg.grid_h, cfg.grid_w, cfg.t_hist, cfg.vocab);
  const MatX<double> zero_a = MatX<double>::Zero(cfg.frames, 3);
  const MatX<double> zero_j = MatX<double>::Zero(cfg.frames, cfg.joints);
  const MatX<double> x = embed_inputs<double>(g, zero_a, zero_j, w, cfg);
  const MatX<double> content = x - w.positional;
  const int per = cfg.tokens_per_frame();
  for (int t = 0; t < cfg.frames; ++t) {
    CHECK(content.row(t * per).cwiseAbs().maxCoeff() == 0.0);
    for (int s = 0; s < cfg.spatial(); ++s)
      CHECK((content.row(t * per + 1 + s).transpose() - w.mask_embedding).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(forward<double>(g, zero_a, zero_j, w, cfg).video_logits.allFinite());
}

TEST_CASE("spatial attention mixes positions within a frame") {
  const ModelConfig cfg = small_config();
  const auto w = ModelWeights<double>::init(cfg, 15);
  Rng rng(16);
  const Inputs a = random_inputs(rng, cfg);
  Inputs b = a;
  b.grid.at(1, 0) = (a.grid.at(1, 0) + 1) % static_cast<tokens::Token>(cfg.vocab.size());
  const auto oa = run(a, w, cfg), ob = run(b, w, cfg);
  const int S = cfg.spatial();
  for (int s = 1; s < S; ++s) CHECK(oa.video_logits.row(S + s) != ob.video_logits.row(S + s));
  CHECK(oa.video_logits.row(0) == ob.video_logits.row(0));
}

TEST_CASE("float and double forward agree") {
  const ModelConfig cfg = small_config();
  const auto wd = ModelWeights<double>::init(cfg, 17);
  const auto wf = wd.cast<float>();
  Rng rng(18);
  const Inputs in = random_inputs(rng, cfg);
  const auto od = run(in, wd, cfg);
  const auto of = forward<float>(in.grid, in.actions.cast<float>(), in.joints.cast<float>(), wf, cfg);
  CHECK((od.video_logits - of.video_logits.cast<double>()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("model predictor slices the target frame") {
  const ModelConfig cfg = small_config();
  const auto w = ModelWeights<double>::init(cfg, 19);
  ModelPredictor<double> pred(cfg, w);
  Rng rng(20);
  const Inputs in = random_inputs(rng, cfg);
  const auto full = forward<double>(in.grid, MatX<double>::Zero(4, 3), MatX<double>::Zero(4, 3), w, cfg);
  const auto p = pred.predict(in.grid, 2, {});
  CHECK(p.video_logits == full.video_logits.middleRows(12, 6));
  CHECK(p.joints.size() == 3);
  CHECK_THROWS_AS(pred.predict(in.grid, 4, {}), InvalidInput);
}

TEST_CASE("loss examples") {
  const tokens::FactorizedVocab v(16, 2);
  TokenGrid targets(1, 1, 2, 0, v);
  targets.at(0, 0) = 0x21;
  targets.at(0, 1) = 0x00;
  const MatX<double> uniform = MatX<double>::Zero(2, 32);
  CHECK(loss_video(uniform, targets, {0}, v) == doctest::Approx(2 * std::log(16.0)).epsilon(1e-12));
  CHECK(loss_video(uniform, targets, {0, 1}, v) == doctest::Approx(2 * std::log(16.0)).epsilon(1e-12));

  MatX<double> onehot = MatX<double>::Zero(2, 32);
  onehot(0, 1) = 1000;       // digit 0 of 0x21 is 1
  onehot(0, 16 + 2) = 1000;  // digit 1 is 2
  CHECK(loss_contact(onehot, targets, {0}, v) == doctest::Approx(0.0));
  CHECK(loss_video(onehot, targets, {}, v) == 0.0);

  const MatX<double> pred = (MatX<double>(2, 2) << 1, 0, 0, 0).finished();
  const MatX<double> tgt = MatX<double>::Zero(2, 2);
  CHECK(loss_joint(pred, tgt) == doctest::Approx(0.5));
  CHECK(loss_joint(tgt, tgt) == 0.0);
  CHECK_THROWS_AS(loss_joint(MatX<double>(0, 2), MatX<double>(0, 2)), InvalidInput);
  CHECK_THROWS_AS(loss_video(uniform, targets, {5}, v), InvalidInput);

  CHECK(loss_total(1, 0, 0) == 1);
  CHECK(loss_total(0, 1, 0) == 2);
  CHECK(loss_total(1, 1, 1) == 4);
}

TEST_CASE("checkpoint roundtrip and corruption") {
  const ModelConfig cfg = small_config();
  const auto w = ModelWeights<float>::init(cfg, 21);
  const auto bytes = encode_checkpoint(cfg, w);
  const Checkpoint back = decode_checkpoint(bytes);
  CHECK(model_config_to_json(back.config) == model_config_to_json(cfg));
  std::vector<std::string> names;
  w.for_each_tensor([&](const std::string& n, const auto&) { names.push_back(n); });
  std::size_t i = 0;
  std::vector<const void*> originals;
  w.for_each_tensor([&](const std::string&, const auto& t) { originals.push_back(&t); });
  back.weights.for_each_tensor([&](const std::string& n, const auto& t) {
    CHECK(n == names[i]);
    using T = std::decay_t<decltype(t)>;
    CHECK(t == *static_cast<const T*>(originals[i]));
    ++i;
  });
  CHECK(i == names.size());
  CHECK(encode_checkpoint(back.config, back.weights) == bytes);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 4);
  CHECK_THROWS_AS(decode_checkpoint(truncated), FormatError);

  const auto dir = std::filesystem::temp_directory_path() / "dreamer_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "m.ckpt", cfg, w);
  CHECK_NOTHROW(load_checkpoint(dir / "m.ckpt", cfg));
  ModelConfig other = cfg;
  other.layers = 1;
  CHECK_THROWS_AS(load_checkpoint(dir / "m.ckpt", other), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config validation and JSON") {
  ModelConfig cfg = small_config();
  cfg.heads = 3;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  CHECK_THROWS_AS(model_config_from_json(nlohmann::json::parse(R"({"layers":"two"})")), FormatError);
  const auto full = ModelConfig::full_scale();
  CHECK(full.layers == 24);
  CHECK(full.hidden == 256);
  CHECK(full.vocab.size() == 65536);
  const auto j = model_config_to_json(small_config());
  CHECK(model_config_to_json(model_config_from_json(j)) == j);
  ModelWeights<double> w = ModelWeights<double>::init(small_config(), 1);
  w.blocks.pop_back();
  CHECK_THROWS_AS(w.validate(small_config()), InvalidInput);
}
