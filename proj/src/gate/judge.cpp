#include "dreamer/gate/judge.hpp"

// After Eigen: resolv.h defines a _res macro that clashes with Eigen parameter names.
#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>

namespace dreamer::gate {

ScriptedJudge::ScriptedJudge(std::vector<Entry> entries, bool cycle) : entries_(std::move(entries)), cycle_(cycle) {
  if (entries_.empty()) throw InvalidInput("scripted judge needs at least one response");
}

ScriptedJudge ScriptedJudge::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("responses") || !j["responses"].is_array())
    throw FormatError("judge script needs a \"responses\" array");
  std::vector<Entry> entries;
  for (const auto& item : j["responses"]) {
    Entry e;
    if (item.is_string()) {
      e.reply = item.get<std::string>();
    } else if (item.is_object() && item.contains("reply") && item["reply"].is_string()) {
      e.reply = item["reply"].get<std::string>();
      e.latency_ms = item.value("latency_ms", 0.0);
    } else if (item.is_object() && item.contains("error") && item["error"].is_string()) {
      e.error = item["error"].get<std::string>();
      e.latency_ms = item.value("latency_ms", 0.0);
    } else {
      throw FormatError("judge script entries must be strings, {\"reply\": ...} or {\"error\": ...}");
    }
    entries.push_back(std::move(e));
  }
  const bool cycle = j.value("cycle", true);
  return ScriptedJudge(std::move(entries), cycle);
}

ScriptedJudge ScriptedJudge::always(const std::string& reply) { return ScriptedJudge({Entry{reply, {}, 0.0}}); }

JudgeReply ScriptedJudge::query(const JudgeRequest& request) {
  requests_.push_back(request);
  const std::size_t i = static_cast<std::size_t>(calls_++);
  if (!cycle_ && i >= entries_.size()) throw JudgeError("judge script exhausted");
  const Entry& e = entries_[i % entries_.size()];
  if (!e.reply) throw JudgeError(e.error);
  return {*e.reply, e.latency_ms};
}

HttpJudge::HttpJudge(HttpJudgeConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.url.find("://");
  if (scheme_end == std::string::npos) throw InvalidInput("judge url needs a scheme: " + cfg_.url);
  const std::string scheme = cfg_.url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw InvalidInput("judge url scheme must be http or https");
  const auto path_start = cfg_.url.find('/', scheme_end + 3);
  scheme_host_port_ = cfg_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : cfg_.url.substr(path_start);
  if (scheme_host_port_.size() <= scheme_end + 3) throw InvalidInput("judge url lacks a host");
  if (!(cfg_.timeout_s > 0)) throw InvalidInput("judge timeout must be positive");
}

nlohmann::json HttpJudge::request_body(const JudgeRequest& request) const {
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", request.text}});
  for (const auto& png : request.images_png)
    content.push_back(
        {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
  return {{"model", cfg_.model},
          {"temperature", cfg_.temperature},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};
}

JudgeReply HttpJudge::query(const JudgeRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto seconds = static_cast<time_t>(std::floor(cfg_.timeout_s));
  const auto micros = static_cast<time_t>((cfg_.timeout_s - std::floor(cfg_.timeout_s)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  const std::string body = request_body(request).dump();
  const auto start = std::chrono::steady_clock::now();
  auto response = client.Post(path_, headers, body, "application/json");
  const double latency =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (!response) throw JudgeError("judge request failed: " + httplib::to_string(response.error()));
  if (response->status != 200) throw JudgeError("judge returned HTTP " + std::to_string(response->status));
  try {
    const auto j = nlohmann::json::parse(response->body);
    const auto& text = j.at("choices").at(0).at("message").at("content");
    if (!text.is_string()) throw JudgeError("judge reply content is not a string");
    return {text.get<std::string>(), latency};
  } catch (const nlohmann::json::exception& e) {
    throw JudgeError(std::string("unexpected judge response body: ") + e.what());
  }
}

}  // namespace dreamer::gate
