// dreamer: command-line front end for the contact-splat, excitation, token,
// dynamics, dataset and gate libraries.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime error.

#include "dreamer/archive.hpp"
#include "dreamer/binary_io.hpp"
#include "dreamer/dataset.hpp"
#include "dreamer/dynamics/checkpoint.hpp"
#include "dreamer/dynamics/predictor.hpp"
#include "dreamer/excitation.hpp"
#include "dreamer/gate/gate.hpp"
#include "dreamer/splat_io.hpp"
#include "dreamer/tokens/grid_io.hpp"
#include "dreamer/tokens/maskgit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace dreamer::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs a config-loading step; input and format problems become usage errors.
template <typename Fn>
auto configure(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const FormatError& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const json::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": invalid JSON: " + e.what());
  }
}

void echo(const std::string& command, const json& config) {
  std::cout << json{{"command", command}, {"config", config}}.dump() << "\n";
}

std::pair<std::string, std::string> split_spec(const std::string& spec, const std::string& flag) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon + 1 == spec.size())
    throw UsageError(flag + " expects <kind>:<argument>, got '" + spec + "'");
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

tokens::UnmaskMode parse_mode(const std::string& name) {
  if (name == "greedy") return tokens::UnmaskMode::kGreedy;
  if (name == "random") return tokens::UnmaskMode::kRandom;
  throw UsageError("unknown unmask mode '" + name + "'");
}

const char* mode_name(tokens::UnmaskMode mode) { return mode == tokens::UnmaskMode::kGreedy ? "greedy" : "random"; }

json schedule_json(const tokens::MaskSchedule& s) {
  return {{"n_steps", s.n_steps}, {"temperature", s.temperature}, {"mode", mode_name(s.mode)}};
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string scene, camera, config, out, format;
};

void add_render(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<RenderArgs>();
  auto* cmd = app.add_subcommand("render-splats", "Render a contact-splat image from a scene");
  cmd->add_option("--scene", args->scene, "scene JSON: [{p, f}, ...]")->required();
  cmd->add_option("--camera", args->camera, "camera JSON")->required();
  cmd->add_option("--config", args->config, "splat config JSON (defaults if omitted)");
  cmd->add_option("--out", args->out, "output image")->required();
  cmd->add_option("--format", args->format, "png or ppm (default: from extension, else png)");
  cmd->callback([args, &run] {
    run = [args] {
      const auto scene = configure("scene", [&] { return scene_from_json(read_json(args->scene)); });
      const auto cam = configure("camera", [&] {
        auto c = camera_from_json(read_json(args->camera));
        c.validate();
        return c;
      });
      const auto cfg = configure("splat config", [&] {
        auto c = args->config.empty() ? SplatConfig<double>{} : splat_config_from_json(read_json(args->config));
        c.validate();
        return c;
      });
      ImageFormat format = ImageFormat::kPng;
      if (!args->format.empty()) {
        format = configure("format", [&] { return format_from_name(args->format); });
      } else if (fs::path(args->out).extension() == ".ppm") {
        format = ImageFormat::kPpm;
      }
      echo("render-splats", {{"scene", args->scene},
                             {"contacts", scene.size()},
                             {"camera", camera_to_json(cam)},
                             {"splat", splat_config_to_json(cfg)},
                             {"format", format == ImageFormat::kPng ? "png" : "ppm"}});
      const SplatImage<double> image = configure("scene", [&] {
        return render_splats<double>(scene, cam, cfg);
      });
      write_image(to_rgb8(image), args->out, format);
    };
  });
}

// ---------------------------------------------------------------------------

struct TrajectoryArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
};

void add_trajectory(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<TrajectoryArgs>();
  auto* cmd = app.add_subcommand("gen-trajectory", "Generate an OU excitation trajectory as JSON lines");
  cmd->add_option("--config", args->config, "trajectory config JSON");
  cmd->add_option("--seed", args->seed, "overrides ou.seed");
  cmd->add_option("--horizon", args->horizon, "overrides excitation.horizon, must lie in [300, 600]");
  cmd->add_option("--out", args->out, "output .jsonl")->required();
  cmd->callback([args, &run] {
    run = [args] {
      TrajectoryConfig cfg = configure("trajectory config", [&] {
        auto c = args->config.empty() ? TrajectoryConfig{} : trajectory_config_from_json(read_json(args->config));
        if (args->seed) c.ou.seed = *args->seed;
        if (args->horizon) c.excitation.horizon = *args->horizon;
        c.ou.validate();
        c.excitation.validate();
        if (!c.excitation.contains(c.p0)) throw InvalidInput("p0 lies outside the workspace box");
        return c;
      });
      if (cfg.excitation.horizon < kMinEpisodeHorizon || cfg.excitation.horizon > kMaxEpisodeHorizon)
        throw UsageError("horizon " + std::to_string(cfg.excitation.horizon) + " outside [" +
                         std::to_string(kMinEpisodeHorizon) + ", " + std::to_string(kMaxEpisodeHorizon) + "]");
      const json header = trajectory_config_to_json(cfg);
      echo("gen-trajectory", header);
      const auto steps = generate_trajectory(cfg.ou, cfg.excitation, cfg.p0);
      std::string text = json{{"config", header}}.dump() + "\n";
      for (const auto& s : steps) text += trajectory_step_to_json(s).dump() + "\n";
      binary::write_file(args->out, text);
    };
  });
}

// ---------------------------------------------------------------------------

struct DecodeArgs {
  std::string predictor, context, out, trace, mode = "greedy";
  int n_steps = 8;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

void add_decode(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<DecodeArgs>();
  auto* cmd = app.add_subcommand("decode-sim", "Run masked iterative decoding of future frames");
  cmd->add_option("--predictor", args->predictor, "oracle:<target grid> or model:<checkpoint>")->required();
  cmd->add_option("--context", args->context, "history grid for model:, random history if omitted");
  cmd->add_option("--n-steps", args->n_steps, "decoding iterations per frame");
  cmd->add_option("--temperature", args->temperature, "sampling temperature");
  cmd->add_option("--mode", args->mode, "greedy or random");
  cmd->add_option("--seed", args->seed, "sampling seed");
  cmd->add_option("--out", args->out, "decoded token grid")->required();
  cmd->add_option("--trace", args->trace, "per-frame mask-count trace (.jsonl), stdout if omitted");
  cmd->callback([args, &run] {
    run = [args] {
      const auto [kind, path] = split_spec(args->predictor, "--predictor");
      tokens::MaskSchedule schedule = configure("schedule", [&] {
        tokens::MaskSchedule s{args->n_steps, args->temperature, parse_mode(args->mode)};
        s.validate();
        return s;
      });

      std::unique_ptr<tokens::Predictor> predictor;
      std::optional<tokens::TokenGrid> target;
      tokens::TokenGrid context;
      std::optional<tokens::FactorizedVocab> vocab;
      json source;
      if (kind == "oracle") {
        auto file = configure("oracle target", [&] { return tokens::load_grid(path); });
        for (int t = 0; t < file.grid.t_hist; ++t)
          for (int s = 0; s < file.grid.spatial(); ++s)
            if (file.grid.is_masked(t, s)) throw UsageError("oracle target has masked history tokens");
        target = file.grid;
        context = file.grid;
        vocab = file.vocab;
        predictor = std::make_unique<tokens::TableLookupPredictor>(file.grid, file.vocab);
        source = {{"kind", "oracle"}, {"target", path}};
      } else if (kind == "model") {
        auto ckpt = configure("checkpoint", [&] { return dynamics::load_checkpoint(path); });
        const auto& mc = ckpt.config;
        vocab = mc.vocab;
        if (!args->context.empty()) {
          auto file = configure("context", [&] { return tokens::load_grid(args->context); });
          if (!(file.vocab == mc.vocab) || file.grid.frames != mc.frames || file.grid.height != mc.grid_h ||
              file.grid.width != mc.grid_w)
            throw UsageError("context grid does not match the checkpoint config");
          context = file.grid;
        } else {
          Rng history_rng(args->seed ^ 0x9e3779b97f4a7c15ull);
          context = tokens::random_grid(history_rng, mc.frames, mc.grid_h, mc.grid_w, mc.t_hist, mc.vocab);
        }
        source = {{"kind", "model"}, {"checkpoint", path}, {"model", dynamics::model_config_to_json(mc)}};
        predictor = std::make_unique<dynamics::ModelPredictor<float>>(mc, std::move(ckpt.weights));
      } else {
        throw UsageError("unknown predictor kind '" + kind + "'");
      }

      echo("decode-sim", {{"predictor", source},
                          {"schedule", schedule_json(schedule)},
                          {"seed", args->seed},
                          {"frames", context.frames},
                          {"t_hist", context.t_hist}});
      Rng rng(args->seed);
      const int n_future = context.frames - context.t_hist;
      const tokens::RolloutResult result = tokens::decode_rollout(*predictor, context, n_future, schedule, rng);
      tokens::save_grid(args->out, result.grid, *vocab);

      std::string trace;
      for (std::size_t i = 0; i < result.frames.size(); ++i) {
        const auto& f = result.frames[i];
        trace += json{{"frame", context.t_hist + static_cast<int>(i)},
                      {"masked_counts", f.masked_counts},
                      {"commit_order", f.commit_order}}
                     .dump() +
                 "\n";
      }
      json summary = {{"frames_decoded", n_future}};
      if (target) summary["matches_target"] = result.grid.tokens == target->tokens;
      trace += summary.dump() + "\n";
      if (args->trace.empty()) {
        std::cout << trace;
      } else {
        binary::write_file(args->trace, trace);
      }
    };
  });
}

// ---------------------------------------------------------------------------

struct GridArgs {
  std::string out;
  std::uint64_t seed = 0;
  int frames = 4, height = 4, width = 4, t_hist = 2, factors = 2;
  std::uint32_t factor_size = 16;
};

void add_synth_grid(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<GridArgs>();
  auto* cmd = app.add_subcommand("synth-grid", "Write a random token grid (e.g. an oracle target)");
  cmd->add_option("--seed", args->seed);
  cmd->add_option("--frames", args->frames);
  cmd->add_option("--height", args->height);
  cmd->add_option("--width", args->width);
  cmd->add_option("--t-hist", args->t_hist);
  cmd->add_option("--factor-size", args->factor_size);
  cmd->add_option("--factors", args->factors);
  cmd->add_option("--out", args->out)->required();
  cmd->callback([args, &run] {
    run = [args] {
      tokens::FactorizedVocab vocab = configure("vocabulary", [&] {
        return tokens::FactorizedVocab(args->factor_size, args->factors);
      });
      Rng rng(args->seed);
      tokens::TokenGrid grid = configure("grid", [&] {
        return tokens::random_grid(rng, args->frames, args->height, args->width, args->t_hist, vocab);
      });
      echo("synth-grid", {{"seed", args->seed},
                          {"frames", grid.frames},
                          {"height", grid.height},
                          {"width", grid.width},
                          {"t_hist", grid.t_hist},
                          {"factor_size", vocab.factor_size()},
                          {"factors", vocab.factors()}});
      tokens::save_grid(args->out, grid, vocab);
    };
  });
}

// ---------------------------------------------------------------------------

struct InitArgs {
  std::string config, out;
  std::uint64_t seed = 0;
};

void add_init_model(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<InitArgs>();
  auto* cmd = app.add_subcommand("init-model", "Write a seeded randomly initialized checkpoint");
  cmd->add_option("--config", args->config, "model config JSON (toy defaults if omitted)");
  cmd->add_option("--seed", args->seed);
  cmd->add_option("--out", args->out)->required();
  cmd->callback([args, &run] {
    run = [args] {
      const dynamics::ModelConfig cfg = configure("model config", [&] {
        auto c = args->config.empty() ? dynamics::ModelConfig{} : dynamics::model_config_from_json(read_json(args->config));
        c.validate();
        return c;
      });
      echo("init-model", {{"model", dynamics::model_config_to_json(cfg)}, {"seed", args->seed}});
      const auto weights = dynamics::ModelWeights<float>::init(cfg, args->seed);
      dynamics::save_checkpoint(args->out, cfg, weights);
    };
  });
}

// ---------------------------------------------------------------------------

struct EpisodeArgs {
  std::string out;
  std::uint64_t seed = 0;
  dataset::SyntheticEpisodeSpec spec;
};

void add_synth_episode(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<EpisodeArgs>();
  auto* cmd = app.add_subcommand("synth-episode", "Write a random valid episode as JSON");
  cmd->add_option("--seed", args->seed);
  cmd->add_option("--frames", args->spec.frames);
  cmd->add_option("--grid-h", args->spec.grid_h);
  cmd->add_option("--grid-w", args->spec.grid_w);
  cmd->add_option("--joints", args->spec.joints);
  cmd->add_option("--bodies", args->spec.bodies);
  cmd->add_option("--codebook", args->spec.codebook_size);
  cmd->add_option("--out", args->out)->required();
  cmd->callback([args, &run] {
    run = [args] {
      Rng rng(args->seed);
      const auto ep = configure("episode spec", [&] { return dataset::synthetic_episode(rng, args->spec); });
      echo("synth-episode", {{"seed", args->seed},
                             {"frames", args->spec.frames},
                             {"grid_h", args->spec.grid_h},
                             {"grid_w", args->spec.grid_w},
                             {"joints", args->spec.joints},
                             {"bodies", args->spec.bodies},
                             {"codebook_size", args->spec.codebook_size}});
      binary::write_file(args->out, dataset::episode_to_json(ep).dump() + "\n");
    };
  });
}

struct PackArgs {
  std::string episode, out;
  int min_frames = kMinEpisodeHorizon, max_frames = kMaxEpisodeHorizon;
};

void add_pack(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<PackArgs>();
  auto* cmd = app.add_subcommand("pack-dataset", "Pack an episode JSON into a directory or stored zip archive");
  cmd->add_option("--episode", args->episode, "episode JSON")->required();
  cmd->add_option("--out", args->out, "archive path (.zip for a zip, else a directory)")->required();
  cmd->add_option("--min-frames", args->min_frames, "episode length lower bound (default 300)");
  cmd->add_option("--max-frames", args->max_frames, "episode length upper bound (default 600)");
  cmd->callback([args, &run] {
    run = [args] {
      const dataset::HorizonBounds bounds{args->min_frames, args->max_frames};
      const auto ep = configure("episode", [&] {
        auto e = dataset::episode_from_json(read_json(args->episode));
        dataset::validate_episode(e, bounds);
        return e;
      });
      echo("pack-dataset", {{"episode", args->episode},
                            {"frames", ep.frames()},
                            {"bounds", {args->min_frames, args->max_frames}},
                            {"zip", archive::is_zip_path(args->out)}});
      dataset::pack_episode(ep, args->out, bounds);
    };
  });
}

struct UnpackArgs {
  std::string archive, out;
  bool lax = false;
  int min_frames = kMinEpisodeHorizon, max_frames = kMaxEpisodeHorizon;
};

void add_unpack(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<UnpackArgs>();
  auto* cmd = app.add_subcommand("unpack-dataset", "Load an archive, print its summary and optionally write JSON");
  cmd->add_option("--archive", args->archive, "zip archive or episode directory")->required();
  cmd->add_option("--out", args->out, "episode JSON output");
  cmd->add_flag("--lax", args->lax, "keep unknown meta.json fields instead of rejecting them");
  cmd->add_option("--min-frames", args->min_frames, "episode length lower bound (default 300)");
  cmd->add_option("--max-frames", args->max_frames, "episode length upper bound (default 600)");
  cmd->callback([args, &run] {
    run = [args] {
      echo("unpack-dataset", {{"archive", args->archive}, {"lax", args->lax}});
      const auto ep = dataset::load_episode(args->archive, args->lax ? dataset::MetaMode::kLax : dataset::MetaMode::kStrict,
                                            {args->min_frames, args->max_frames});
      std::cout << json{{"frames", ep.frames()},
                        {"grid_h", ep.grid_h},
                        {"grid_w", ep.grid_w},
                        {"joints", ep.q.cols()},
                        {"bodies", ep.mu_s.cols()},
                        {"codebook_size", ep.codebook_size},
                        {"has_reward", ep.reward.has_value()},
                        {"extra_meta", ep.extra_meta}}
                       .dump()
                << "\n";
      if (!args->out.empty()) binary::write_file(args->out, dataset::episode_to_json(ep).dump() + "\n");
    };
  });
}

// ---------------------------------------------------------------------------

struct GateArgs {
  std::string judge, config, log;
  int steps = 1;
  std::uint64_t seed = 0;
};

std::unique_ptr<gate::ActionSampler> make_sampler(const json& j, std::uint64_t seed, double& v_scale) {
  const std::string type = j.value("type", "ou");
  if (type == "ou") {
    TrajectoryConfig tc = trajectory_config_from_json(j);
    tc.ou.seed = seed;
    v_scale = tc.excitation.v_scale;
    return std::make_unique<gate::OuActionSampler>(tc.ou, tc.excitation);
  }
  if (type == "scripted") {
    std::vector<gate::CandidateAction> actions;
    for (const auto& a : j.at("actions")) {
      const auto v = a.get<std::vector<double>>();
      if (v.size() != 3) throw FormatError("scripted actions must have 3 components");
      actions.push_back({Vector3d(v[0], v[1], v[2])});
    }
    return std::make_unique<gate::ScriptedActionSampler>(std::move(actions));
  }
  throw FormatError("unknown sampler type '" + type + "'");
}

std::unique_ptr<gate::RolloutProvider> make_rollout(const json& j, std::uint64_t seed) {
  const std::string type = j.value("type", "synthetic");
  if (type == "synthetic") {
    return std::make_unique<gate::SyntheticRolloutProvider>(j.value("tile_size", 32), j.value("history_frames", 2),
                                                            j.value("future_frames", 8));
  }
  if (type == "model") {
    auto ckpt = dynamics::load_checkpoint(j.at("checkpoint").get<std::string>());
    const auto& mc = ckpt.config;
    gate::ModelRolloutConfig rc;
    rc.schedule = {j.value("n_steps", 8), j.value("temperature", 1.0), parse_mode(j.value("mode", "greedy"))};
    rc.fsq_levels = j.at("fsq_levels").get<std::vector<int>>();
    rc.pixel_scale = j.value("pixel_scale", 8);
    rc.seed = seed + 1;
    tokens::TokenGrid history;
    if (j.contains("context")) {
      auto file = tokens::load_grid(j["context"].get<std::string>());
      history = file.grid;
    } else {
      Rng history_rng(seed ^ 0x9e3779b97f4a7c15ull);
      history = tokens::random_grid(history_rng, mc.frames, mc.grid_h, mc.grid_w, mc.t_hist, mc.vocab);
      for (int t = mc.t_hist; t < mc.frames; ++t) history.mask_frame(t);
    }
    return std::make_unique<gate::ModelRolloutProvider>(mc, std::move(ckpt.weights), std::move(history), rc);
  }
  throw FormatError("unknown rollout type '" + type + "'");
}

void add_gate(CLI::App& app, std::function<void()>& run) {
  auto args = std::make_shared<GateArgs>();
  auto* cmd = app.add_subcommand("gate-sim", "Run the collision gate loop against a judge");
  cmd->add_option("--judge", args->judge, "mock:<script.json> or http:<endpoint url>")->required();
  cmd->add_option("--config", args->config, "gate config JSON")->required();
  cmd->add_option("--steps", args->steps, "gate steps to run");
  cmd->add_option("--seed", args->seed, "sampler and rollout seed");
  cmd->add_option("--log", args->log, "attempt log (.jsonl)")->required();
  cmd->callback([args, &run] {
    run = [args] {
      if (args->steps < 1) throw UsageError("--steps must be at least 1");
      const json cfg_json = read_json(args->config);
      if (!cfg_json.is_object()) throw UsageError("gate config must be a JSON object");
      double v_scale = ExcitationConfig<double>{}.v_scale;
      auto sampler = configure("sampler config", [&] {
        return make_sampler(cfg_json.value("sampler", json::object()), args->seed, v_scale);
      });
      gate::GateConfig gate_cfg = configure("gate config", [&] {
        gate::GateConfig c;
        c.retreat_action.v = Vector3d(0, 0, -1) * v_scale;
        const json g = cfg_json.value("gate", json::object());
        if (!g.contains("retreat_action")) {
          gate::GateConfig parsed = gate::gate_config_from_json(g);
          parsed.retreat_action = c.retreat_action;
          return parsed;
        }
        return gate::gate_config_from_json(g);
      });
      auto rollout = configure("rollout config", [&] {
        return make_rollout(cfg_json.value("rollout", json::object()), args->seed);
      });

      const auto [kind, target] = split_spec(args->judge, "--judge");
      std::unique_ptr<gate::Judge> judge;
      json judge_echo;
      if (kind == "mock") {
        judge = configure("judge script", [&] {
          return std::make_unique<gate::ScriptedJudge>(gate::ScriptedJudge::from_json(read_json(target)));
        });
        judge_echo = {{"kind", "mock"}, {"script", target}};
      } else if (kind == "http") {
        gate::HttpJudgeConfig hc;
        hc.url = target;
        const json jc = cfg_json.value("judge", json::object());
        judge = configure("judge config", [&] {
          hc.model = jc.value("model", hc.model);
          hc.api_key_env = jc.value("api_key_env", hc.api_key_env);
          hc.timeout_s = jc.value("timeout_s", hc.timeout_s);
          hc.temperature = jc.value("temperature", hc.temperature);
          return std::make_unique<gate::HttpJudge>(hc);
        });
        judge_echo = {{"kind", "http"}, {"url", hc.url}, {"model", hc.model}, {"api_key_env", hc.api_key_env},
                      {"timeout_s", hc.timeout_s}};
      } else {
        throw UsageError("unknown judge kind '" + kind + "'");
      }

      echo("gate-sim", {{"gate", gate::gate_config_to_json(gate_cfg)},
                        {"sampler", cfg_json.value("sampler", json::object())},
                        {"rollout", cfg_json.value("rollout", json::object())},
                        {"judge", judge_echo},
                        {"steps", args->steps},
                        {"seed", args->seed}});

      std::string log;
      for (int step = 0; step < args->steps; ++step) {
        const gate::GateOutcome outcome = gate::gate_step(step, *sampler, *rollout, *judge, gate_cfg);
        for (const auto& record : outcome.attempts) log += gate::attempt_to_json(record).dump() + "\n";
        std::cout << json{{"step", step},
                          {"action", {outcome.action.v.x(), outcome.action.v.y(), outcome.action.v.z()}},
                          {"retreated", outcome.retreated},
                          {"attempts", outcome.attempts.size()}}
                         .dump()
                  << "\n";
      }
      binary::write_file(args->log, log);
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-aware world-model toolkit"};
  app.require_subcommand(1);
  std::function<void()> run;
  add_render(app, run);
  add_trajectory(app, run);
  add_decode(app, run);
  add_synth_grid(app, run);
  add_init_model(app, run);
  add_synth_episode(app, run);
  add_pack(app, run);
  add_unpack(app, run);
  add_gate(app, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    run();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dreamer::cli

int main(int argc, char** argv) { return dreamer::cli::main(argc, argv); }
