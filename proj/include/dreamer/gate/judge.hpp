#pragma once

#include "dreamer/gate/prompt.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dreamer::gate {

/// Transport-level failure of a judge call.
class JudgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JudgeReply {
  std::string raw;
  double latency_ms = 0.0;
};

class Judge {
 public:
  virtual ~Judge() = default;
  /// Raw reply text; throws JudgeError when no reply was obtained.
  virtual JudgeReply query(const JudgeRequest& request) = 0;
};

/// Replays a fixed list of replies. Each entry is either reply text or a
/// simulated transport failure.
class ScriptedJudge : public Judge {
 public:
  struct Entry {
    std::optional<std::string> reply;  // nullopt: throw JudgeError(error)
    std::string error;
    double latency_ms = 0.0;
  };

  explicit ScriptedJudge(std::vector<Entry> entries, bool cycle = true);

  /// {"responses": [<string> | {"reply": s, "latency_ms": x} | {"error": s}], "cycle": true}
  static ScriptedJudge from_json(const nlohmann::json& j);
  static ScriptedJudge always(const std::string& reply);

  JudgeReply query(const JudgeRequest& request) override;

  int calls() const { return calls_; }
  const std::vector<JudgeRequest>& requests() const { return requests_; }

 private:
  std::vector<Entry> entries_;
  bool cycle_;
  int calls_ = 0;
  std::vector<JudgeRequest> requests_;
};

struct HttpJudgeConfig {
  std::string url;  // full endpoint, e.g. http://host:port/v1/chat/completions
  std::string model = "gemma-3-27b-it";
  std::string api_key_env = "DREAMER_JUDGE_API_KEY";
  double timeout_s = 30.0;
  double temperature = 0.0;
};

/// Chat-completions style client. One POST per query, no retries; any
/// connection error, timeout, non-200 status or unexpected body is a JudgeError.
class HttpJudge : public Judge {
 public:
  explicit HttpJudge(HttpJudgeConfig cfg);

  JudgeReply query(const JudgeRequest& request) override;

  /// The request body sent for `request`.
  nlohmann::json request_body(const JudgeRequest& request) const;

 private:
  HttpJudgeConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace dreamer::gate
