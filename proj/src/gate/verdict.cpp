#include "dreamer/gate/verdict.hpp"

#include <cmath>

namespace dreamer::gate {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string strip_fence(const std::string& text) {
  if (text.rfind("```", 0) != 0) return text;
  const auto newline = text.find('\n');
  if (newline == std::string::npos) throw VerdictError(VerdictError::Kind::kMalformedJson, "unterminated code fence");
  const std::string tag = trim(text.substr(3, newline - 3));
  if (!tag.empty() && tag != "json")
    throw VerdictError(VerdictError::Kind::kMalformedJson, "unexpected code fence language '" + tag + "'");
  if (text.size() < newline + 4 || text.compare(text.size() - 3, 3, "```") != 0)
    throw VerdictError(VerdictError::Kind::kMalformedJson, "unterminated code fence");
  return trim(text.substr(newline + 1, text.size() - 3 - (newline + 1)));
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw VerdictError(VerdictError::Kind::kMissingField, std::string("verdict lacks '") + key + "'");
  return j[key];
}

}  // namespace

JudgeVerdict parse_verdict(const std::string& raw) {
  const std::string body = strip_fence(trim(raw));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw VerdictError(VerdictError::Kind::kMalformedJson, std::string("verdict is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw VerdictError(VerdictError::Kind::kNotAnObject, "verdict must be a JSON object");

  JudgeVerdict v;
  const auto& collision = field(j, "collision_likely");
  if (!collision.is_boolean())
    throw VerdictError(VerdictError::Kind::kWrongType, "collision_likely must be a boolean");
  v.collision_likely = collision.get<bool>();

  const auto& confidence = field(j, "confidence");
  if (!confidence.is_number()) throw VerdictError(VerdictError::Kind::kWrongType, "confidence must be a number");
  v.confidence = confidence.get<double>();
  if (!(v.confidence >= 0.0 && v.confidence <= 1.0))
    throw VerdictError(VerdictError::Kind::kConfidenceRange, "confidence outside [0, 1]");

  const auto& frame = field(j, "first_collision_frame");
  if (!frame.is_number_integer())
    throw VerdictError(VerdictError::Kind::kWrongType, "first_collision_frame must be an integer");
  const auto frame_value = frame.get<std::int64_t>();
  if (frame_value < 0 || frame_value > 7)
    throw VerdictError(VerdictError::Kind::kFrameRange, "first_collision_frame outside [0, 7]");
  v.first_collision_frame = static_cast<int>(frame_value);

  const auto& explanation = field(j, "explanation");
  if (!explanation.is_string()) throw VerdictError(VerdictError::Kind::kWrongType, "explanation must be a string");
  v.explanation = explanation.get<std::string>();
  return v;
}

nlohmann::json verdict_to_json(const JudgeVerdict& v) {
  return {{"collision_likely", v.collision_likely},
          {"confidence", v.confidence},
          {"first_collision_frame", v.first_collision_frame},
          {"explanation", v.explanation}};
}

}  // namespace dreamer::gate
