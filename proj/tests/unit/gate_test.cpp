#include "dreamer/gate/gate.hpp"
#include "dreamer/tokens/grid_io.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

// After the Eigen-based headers: resolv.h defines macros that collide with Eigen.
#include <httplib.h>

using namespace dreamer;
using namespace dreamer::gate;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kCollisionReply = R"({
  "collision_likely": true,
  "confidence": 0.95,
  "first_collision_frame": 4,
  "explanation": "The gripper visibly contacts the small cylindrical object and pushes it to the right across multiple future frames. Clear displacement is visible in the RGB images."
})";

const char* kSafeReply = R"({
  "collision_likely": false,
  "confidence": 0.3,
  "first_collision_frame": 0,
  "explanation": "Gripper approaches object but no visible displacement of the object is observed in the predicted RGB frames. Apparent changes could be due to camera motion."
})";

Rgb8Image solid(int w, int h, std::uint8_t value) {
  Rgb8Image img(w, h);
  std::fill(img.data.begin(), img.data.end(), value);
  return img;
}

VerdictError::Kind verdict_kind(const std::string& raw) {
  try {
    parse_verdict(raw);
  } catch (const VerdictError& e) {
    return e.kind();
  }
  FAIL("expected a VerdictError for: " << raw);
  return VerdictError::Kind::kMalformedJson;
}

ScriptedActionSampler three_actions() {
  return ScriptedActionSampler({{Vector3d(0.1, 0, 0)}, {Vector3d(0, 0.1, 0)}, {Vector3d(0, 0, 0.1)}});
}

// Serves canned chat-completions replies on a loopback port for one test.
struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string last_body;
  std::string last_auth;

  LocalServer() {
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    thread.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }
};

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

}  // namespace

TEST_CASE("prompt template matches the golden file byte for byte") {
  const std::string golden = read_text(std::string(DREAMER_TEST_DATA) + "/golden/judge_prompt.txt");
  CHECK(judge_prompt_template() == golden);
  CHECK(golden.find("You are a strict collision verifier.") != std::string::npos);
  CHECK(golden.find("Do NOT claim collision based only on the contact map.") != std::string::npos);
  CHECK(golden.find("\\_") == std::string::npos);
  CHECK(golden.back() == '\n');
}

TEST_CASE("build_prompt attaches history, future and contact in order") {
  const Rgb8Image h = solid(4, 2, 10), f = solid(6, 2, 20), c = solid(8, 2, 30);
  const JudgeRequest req = build_prompt(h, f, c);
  CHECK(req.text == judge_prompt_template());
  REQUIRE(req.images_png.size() == 3);
  CHECK(req.images_png[0] == encode_png(h));
  CHECK(req.images_png[1] == encode_png(f));
  CHECK(req.images_png[2] == encode_png(c));
  CHECK_THROWS_AS(build_prompt(h, Rgb8Image{}, c), InvalidInput);
  CHECK_THROWS_AS(build_prompt(Rgb8Image{}, f, c), InvalidInput);
  CHECK_THROWS_AS(build_prompt(h, f, Rgb8Image{}), InvalidInput);
}

TEST_CASE("the two reference replies parse to their fields") {
  const JudgeVerdict hit = parse_verdict(kCollisionReply);
  CHECK(hit.collision_likely);
  CHECK(hit.confidence == 0.95);
  CHECK(hit.first_collision_frame == 4);
  CHECK(hit.explanation ==
        "The gripper visibly contacts the small cylindrical object and pushes it to the right across multiple future "
        "frames. Clear displacement is visible in the RGB images.");
  const JudgeVerdict safe = parse_verdict(kSafeReply);
  CHECK_FALSE(safe.collision_likely);
  CHECK(safe.confidence == 0.3);
  CHECK(safe.first_collision_frame == 0);

  const JudgeVerdict fenced = parse_verdict(std::string("```json\n") + kSafeReply + "\n```\n");
  CHECK(fenced == safe);
  CHECK(parse_verdict(std::string("  ```\n") + kSafeReply + "```") == safe);
  CHECK(parse_verdict(verdict_to_json(hit).dump()) == hit);
}

TEST_CASE("malformed replies map to distinct error kinds") {
  using K = VerdictError::Kind;
  CHECK(verdict_kind("") == K::kMalformedJson);
  CHECK(verdict_kind("Sure! {\"collision_likely\": true}") == K::kMalformedJson);
  CHECK(verdict_kind("{\"collision_likely\": true,") == K::kMalformedJson);
  CHECK(verdict_kind("[1, 2]") == K::kNotAnObject);
  CHECK(verdict_kind(R"({"collision_likely": true, "confidence": 0.5, "first_collision_frame": 1})") ==
        K::kMissingField);
  CHECK(verdict_kind(R"({"collision_likely": "yes", "confidence": 0.5, "first_collision_frame": 1, "explanation": ""})") ==
        K::kWrongType);
  CHECK(verdict_kind(R"({"collision_likely": true, "confidence": 1.5, "first_collision_frame": 1, "explanation": ""})") ==
        K::kConfidenceRange);
  CHECK(verdict_kind(R"({"collision_likely": true, "confidence": -0.1, "first_collision_frame": 1, "explanation": ""})") ==
        K::kConfidenceRange);
  CHECK(verdict_kind(R"({"collision_likely": true, "confidence": 0.5, "first_collision_frame": 8, "explanation": ""})") ==
        K::kFrameRange);
  CHECK(verdict_kind(R"({"collision_likely": true, "confidence": 0.5, "first_collision_frame": 1.5, "explanation": ""})") ==
        K::kWrongType);
  CHECK_NOTHROW(
      parse_verdict(R"({"collision_likely": true, "confidence": 1, "first_collision_frame": 7, "explanation": ""})"));
}

TEST_CASE("gate accepts on the first safe verdict") {
  auto sampler = three_actions();
  SyntheticRolloutProvider rollout;
  auto judge = ScriptedJudge::always(kSafeReply);
  const GateOutcome out = gate_step(0, sampler, rollout, judge, {});
  CHECK_FALSE(out.retreated);
  REQUIRE(out.attempts.size() == 1);
  CHECK(out.attempts[0].accepted);
  CHECK(out.action.v == Vector3d(0.1, 0, 0));
  CHECK(judge.calls() == 1);
  CHECK(judge.requests()[0].images_png.size() == 3);
}

TEST_CASE("gate retreats after three rejections") {
  auto sampler = three_actions();
  SyntheticRolloutProvider rollout;
  auto judge = ScriptedJudge::always(kCollisionReply);
  const GateConfig cfg;
  const GateOutcome out = gate_step(5, sampler, rollout, judge, cfg);
  CHECK(out.retreated);
  CHECK(out.attempts.size() == 3);
  CHECK(judge.calls() == 3);
  CHECK(out.action == cfg.retreat_action);
  CHECK(out.action.v.z() < 0);
  CHECK(out.action.v.head<2>().isZero());
  for (int i = 0; i < 3; ++i) {
    CHECK(out.attempts[static_cast<std::size_t>(i)].attempt == i);
    CHECK(out.attempts[static_cast<std::size_t>(i)].step == 5);
    CHECK_FALSE(out.attempts[static_cast<std::size_t>(i)].accepted);
  }
  // Each attempt imagined a different action, so the rollouts differ.
  CHECK(judge.requests()[0].images_png[1] != judge.requests()[1].images_png[1]);
  CHECK(judge.requests()[0].images_png[0] == judge.requests()[1].images_png[0]);
}

TEST_CASE("gate resamples after a rejection and accepts the second action") {
  auto sampler = three_actions();
  SyntheticRolloutProvider rollout;
  ScriptedJudge judge({{kCollisionReply, "", 12.5}, {kSafeReply, "", 3.0}});
  const GateOutcome out = gate_step(0, sampler, rollout, judge, {});
  CHECK_FALSE(out.retreated);
  REQUIRE(out.attempts.size() == 2);
  CHECK(out.action.v == Vector3d(0, 0.1, 0));
  CHECK(out.attempts[0].latency_ms == 12.5);
  CHECK(out.attempts[0].verdict->confidence == 0.95);
}

TEST_CASE("judge failures count as rejections and are logged") {
  auto sampler = three_actions();
  SyntheticRolloutProvider rollout;
  ScriptedJudge judge({{std::nullopt, "connection reset", 0}, {"not json at all", "", 0}, {kSafeReply, "", 0}});
  const GateOutcome out = gate_step(0, sampler, rollout, judge, {});
  REQUIRE(out.attempts.size() == 3);
  CHECK(out.attempts[0].error.find("connection reset") != std::string::npos);
  CHECK_FALSE(out.attempts[0].verdict.has_value());
  CHECK_FALSE(out.attempts[1].error.empty());
  CHECK(out.attempts[2].accepted);
  const auto j = attempt_to_json(out.attempts[0]);
  CHECK(j.at("error") == out.attempts[0].error);
  CHECK_FALSE(j.contains("verdict"));
  CHECK(attempt_to_json(out.attempts[2]).at("verdict").at("confidence") == 0.3);
}

TEST_CASE("confidence threshold turns low-risk verdicts into rejections") {
  const JudgeVerdict safe = parse_verdict(kSafeReply);
  GateConfig cfg;
  CHECK(accepts(safe, cfg));
  cfg.confidence_threshold = 0.25;
  CHECK_FALSE(accepts(safe, cfg));
  cfg.confidence_threshold = 0.5;
  CHECK(accepts(safe, cfg));
  CHECK_FALSE(accepts(parse_verdict(kCollisionReply), cfg));
}

TEST_CASE("gate config validation and JSON") {
  GateConfig cfg;
  cfg.max_attempts = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  const auto parsed = gate_config_from_json(
      nlohmann::json::parse(R"({"max_attempts": 5, "retreat_action": [0, 0, -0.5], "confidence_threshold": 0.8})"));
  CHECK(parsed.max_attempts == 5);
  CHECK(parsed.retreat_action.v == Vector3d(0, 0, -0.5));
  CHECK(*parsed.confidence_threshold == 0.8);
  const auto back = gate_config_from_json(gate_config_to_json(parsed));
  CHECK(back.max_attempts == 5);
  CHECK(back.retreat_action == parsed.retreat_action);
  CHECK_THROWS_AS(gate_config_from_json(nlohmann::json::parse(R"({"max_attempts": "3"})")), FormatError);
}

TEST_CASE("scripted judge JSON and replay") {
  auto judge = ScriptedJudge::from_json(nlohmann::json::parse(
      R"({"responses": ["a", {"reply": "b", "latency_ms": 7}, {"error": "boom"}], "cycle": false})"));
  const JudgeRequest req;
  CHECK(judge.query(req).raw == "a");
  const auto b = judge.query(req);
  CHECK(b.raw == "b");
  CHECK(b.latency_ms == 7);
  CHECK_THROWS_AS(judge.query(req), JudgeError);
  CHECK_THROWS_AS(judge.query(req), JudgeError);  // exhausted
  auto cyc = ScriptedJudge::from_json(nlohmann::json::parse(R"({"responses": ["x", "y"]})"));
  CHECK(cyc.query(req).raw == "x");
  CHECK(cyc.query(req).raw == "y");
  CHECK(cyc.query(req).raw == "x");
}

TEST_CASE("a gate loop replays identically") {
  auto run = [] {
    OUParams<double> p;
    p.seed = 3;
    OuActionSampler sampler(p, ExcitationConfig<double>{});
    SyntheticRolloutProvider rollout;
    ScriptedJudge judge({{kCollisionReply, "", 0}, {kSafeReply, "", 0}, {kCollisionReply, "", 0},
                         {kCollisionReply, "", 0}, {kCollisionReply, "", 0}});
    std::string log;
    for (int step = 0; step < 6; ++step)
      for (const auto& a : gate_step(step, sampler, rollout, judge, {}).attempts) log += attempt_to_json(a).dump() + "\n";
    return log;
  };
  const std::string a = run();
  CHECK(a == run());
  CHECK(a.find("\"accepted\":true") != std::string::npos);
}

TEST_CASE("OU sampler proposals respect min-norm and deadzone and advance only when executed") {
  OUParams<double> p;
  p.seed = 11;
  ExcitationConfig<double> cfg;
  OuActionSampler a(p, cfg), b(p, cfg);
  const CandidateAction first = a.sample();
  const CandidateAction retry = a.sample();
  CHECK(first == b.sample());
  CHECK(retry == b.sample());
  CHECK(first.v.norm() >= cfg.v_scale * cfg.m_min * (1 - 1e-12));
  for (int i = 0; i < 3; ++i)
    CHECK((first.v[i] == 0.0 || std::abs(first.v[i]) >= cfg.v_scale * cfg.epsilon * (1 - 1e-12)));
  a.on_executed(first, false);
  b.on_executed({Vector3d(0, 0, -1)}, true);
  CHECK_FALSE(a.sample() == b.sample());
}

TEST_CASE("HTTP judge talks chat-completions to a local server") {
  LocalServer srv;
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    srv.last_body = req.body;
    srv.last_auth = req.get_header_value("Authorization");
    res.set_content(completion(kSafeReply), "application/json");
  });
  srv.server.Post("/fail", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("busy", "text/plain");
  });
  srv.server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });
  srv.server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(completion(kSafeReply), "application/json");
  });

  ::setenv("DREAMER_TEST_JUDGE_KEY", "secret-token", 1);
  HttpJudgeConfig cfg;
  cfg.url = srv.url("/v1/chat/completions");
  cfg.api_key_env = "DREAMER_TEST_JUDGE_KEY";
  cfg.timeout_s = 5;
  HttpJudge judge(cfg);
  const JudgeRequest req = build_prompt(solid(2, 2, 1), solid(2, 2, 2), solid(2, 2, 3));
  const JudgeReply reply = judge.query(req);
  CHECK(parse_verdict(reply.raw) == parse_verdict(kSafeReply));
  CHECK(reply.latency_ms >= 0);
  CHECK(srv.last_auth == "Bearer secret-token");
  const auto body = nlohmann::json::parse(srv.last_body);
  CHECK(body == judge.request_body(req));
  CHECK(body.at("model") == "gemma-3-27b-it");
  const auto& content = body.at("messages").at(0).at("content");
  REQUIRE(content.size() == 4);
  CHECK(content[0].at("text") == judge_prompt_template());
  CHECK(content[1].at("image_url").at("url") == "data:image/png;base64," + base64_encode(req.images_png[0]));
  CHECK(content[3].at("image_url").at("url") == "data:image/png;base64," + base64_encode(req.images_png[2]));

  cfg.url = srv.url("/fail");
  CHECK_THROWS_AS(HttpJudge(cfg).query(req), JudgeError);
  cfg.url = srv.url("/garbage");
  CHECK_THROWS_AS(HttpJudge(cfg).query(req), JudgeError);
  cfg.url = srv.url("/slow");
  cfg.timeout_s = 0.3;
  CHECK_THROWS_AS(HttpJudge(cfg).query(req), JudgeError);
  cfg.url = "http://127.0.0.1:1/none";
  CHECK_THROWS_AS(HttpJudge(cfg).query(req), JudgeError);
  cfg.url = "ftp://x";
  CHECK_THROWS_AS(HttpJudge{cfg}, InvalidInput);

  // Through the gate, an unreachable judge retreats.
  auto sampler = three_actions();
  SyntheticRolloutProvider rollout;
  cfg.url = "http://127.0.0.1:1/none";
  HttpJudge dead(cfg);
  CHECK(gate_step(0, sampler, rollout, dead, {}).retreated);
}

TEST_CASE("model rollout provider renders decoded tiles and advances history") {
  dynamics::ModelConfig mc;
  mc.layers = 1;
  mc.hidden = 16;
  mc.heads = 2;
  mc.frames = 4;
  mc.t_hist = 2;
  mc.grid_h = 2;
  mc.grid_w = 2;
  mc.vocab = tokens::FactorizedVocab(8, 2);
  mc.joints = 2;
  const auto weights = dynamics::ModelWeights<float>::init(mc, 1);
  Rng rng(2);
  const tokens::TokenGrid history = tokens::random_grid(rng, 4, 2, 2, 2, mc.vocab);
  ModelRolloutConfig rc;
  rc.schedule.n_steps = 2;
  rc.fsq_levels = {4, 4, 4};
  rc.pixel_scale = 3;
  rc.seed = 5;
  ModelRolloutProvider provider(mc, weights, history, rc);
  const CandidateAction act{Vector3d(0.1, 0, 0)};
  const Rollout r = provider.imagine(act);
  CHECK(r.history.width == 2 * 2 * 3);
  CHECK(r.history.height == 2 * 3);
  CHECK(r.future.width == 2 * 2 * 3);
  CHECK(r.contact.width == 2 * 2 * 3);
  const auto before = provider.history();
  provider.on_executed(act, true);
  CHECK(provider.history() == before);
  // A retreat drops pending rollouts; only an imagined action can advance history.
  provider.on_executed(act, false);
  CHECK(provider.history() == before);
  provider.imagine(act);
  provider.on_executed(act, false);
  CHECK_FALSE(provider.history() == before);
  for (int s = 0; s < 4; ++s) CHECK(provider.history().is_masked(3, s));

  rc.fsq_levels = {4, 4};
  CHECK_THROWS_AS(ModelRolloutProvider(mc, weights, history, rc), InvalidInput);
}
