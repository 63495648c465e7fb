#pragma once

#include "dreamer/types.hpp"

#include <json.hpp>

#include <string>

namespace dreamer::gate {

struct JudgeVerdict {
  bool collision_likely = false;
  double confidence = 0.0;        // [0, 1]
  int first_collision_frame = 0;  // [0, 7]
  std::string explanation;

  bool operator==(const JudgeVerdict&) const = default;
};

class VerdictError : public FormatError {
 public:
  enum class Kind { kMalformedJson, kNotAnObject, kMissingField, kWrongType, kConfidenceRange, kFrameRange };

  VerdictError(Kind kind, const std::string& message) : FormatError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Strict parse of a judge reply. Surrounding whitespace and one Markdown
/// code fence (``` or ```json) are tolerated; anything else around the JSON
/// object is a kMalformedJson error.
JudgeVerdict parse_verdict(const std::string& raw);

nlohmann::json verdict_to_json(const JudgeVerdict& v);

}  // namespace dreamer::gate
