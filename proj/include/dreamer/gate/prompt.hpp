#pragma once

#include "dreamer/image_io.hpp"
#include "dreamer/types.hpp"

#include <string>
#include <vector>

namespace dreamer::gate {

/// The collision-judge instruction text, byte for byte.
const std::string& judge_prompt_template();

struct JudgeRequest {
  std::string text;
  /// PNG-encoded attachments in order: history RGB, predicted RGB, predicted contact.
  std::vector<std::vector<std::uint8_t>> images_png;

  bool operator==(const JudgeRequest&) const = default;
};

/// Throws InvalidInput when any of the three tiles is empty.
JudgeRequest build_prompt(const Rgb8Image& history_tile, const Rgb8Image& future_tile, const Rgb8Image& contact_tile);

}  // namespace dreamer::gate
