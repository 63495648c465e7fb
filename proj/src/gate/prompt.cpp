#include "dreamer/gate/prompt.hpp"

namespace dreamer::gate {

const std::string& judge_prompt_template() {
  static const std::string kTemplate = R"PROMPT(
Do you think there is a collision happening between the manipulator and any of the objects on the table? The camera is mounted on the arm of the manipulator. You are a strict collision verifier.

You will be shown:
(1) History RGB frames (prompt)
(2) Predicted future RGB frames (generated)
(3) Predicted contact map (generated) -- WARNING: this is noisy and often has false positives.

TASK
Decide if a collision happens between the manipulator/gripper and ANY table object.

DEFINITION
Output collision_likely=true ONLY if BOTH are true:
(A) In the predicted future RGB frames, the gripper/manipulator makes physically plausible contact with an object (not just overlaps in 2D).
(B) At least one of the following is visible in RGB:
    (B1) The object moves/rotates/shifts relative to the table (displacement) compared to its pose in the last prompt frame.
    (B2) The object deforms/deflects/compresses at the contact point (common for chains/FEA/deformables), even if its base pose does not translate.
    (B3) There is sustained pushing/pressing contact across multiple future frames with no visible gap, even if the object is constrained/heavy and does not translate.

IMPORTANT RULES (to reduce false positives)
- Do NOT claim collision based only on the contact map. The contact map can be wrong.
- If the gripper crosses over an object in the image in 2D but there is a visible gap/clearance (no sustained contact), this is NOT a collision.
- If you cannot clearly see contact evidence in the predicted RGB frames (displacement, deformation/deflection, or sustained pressing contact), set collision_likely=false.
- Lack of object translation does NOT imply "no collision" when the object is constrained/heavy or deformable. In those cases, look for deformation/deflection or sustained pressing contact.
- If the yellow table seems becoming smaller, this likely means the arm/camera is lifting upward; lifting makes collision less likely. Prefer collision_likely=false unless there is clear contact evidence.
- Only give high confidence (>= 0.85) when contact evidence is obvious and sustained across multiple future frames.
- If evidence is ambiguous or blurred, set collision_likely=false and confidence <= 0.5.

FEW-SHOT EXAMPLES (read carefully)
Example 1 (NO collision: high clearance pass-over)
    Predicted frames show the gripper moving "over" a block in 2D, but the block's pose does not change relative to the table. Even if the contact map lights up near the block, answer:
    {"collision_likely": false, "confidence": 0.3, "first_collision_frame": 0, "explanation": "Gripper passes above/near object; no visible displacement in RGB."}

Example 2 (NO collision: apparent motion from camera ego-motion)
    Camera moves with the arm; objects may appear to shift slightly due to viewpoint changes. If the object remains fixed relative to table edges/markers and there is no clear push/impact, answer:
    {"collision_likely": false, "confidence": 0.4, "first_collision_frame": 0, "explanation": "No clear object displacement; apparent changes likely from camera motion."}

Example 3 (YES collision: clear push)
    Gripper contacts a block and the block translates/rotates in a sustained way across multiple future frames. Answer:
    {"collision_likely": true, "confidence": 0.9, "first_collision_frame": 1, "explanation": "Contact with sustained object displacement visible in RGB."}

Example 4 (YES collision: constrained/heavy/deformable object)
    The gripper presses into a chain/beam/deformable object and you can see bending/compression/deflection at the contact point, even if the object does not translate. Answer:
    {"collision_likely": true, "confidence": 0.85, "first_collision_frame": 1, "explanation": "Sustained pressing contact with visible deformation/deflection in RGB."}

Inputs:
- Image 1: history RGB frames (prompt)
- Image 2: predicted future RGB frames (generated)
- Image 3: predicted future contact map (generated)

Return JSON only with the following schema:
{
    "collision_likely": true/false,
    "confidence": 0.0-1.0,
    "first_collision_frame": 0-7,
    "explanation": "..."
}
)PROMPT";
  // The raw literal opens with a newline for readability.
  static const std::string kText = kTemplate.substr(1);
  return kText;
}

JudgeRequest build_prompt(const Rgb8Image& history_tile, const Rgb8Image& future_tile, const Rgb8Image& contact_tile) {
  const Rgb8Image* images[] = {&history_tile, &future_tile, &contact_tile};
  const char* names[] = {"history", "future RGB", "future contact"};
  JudgeRequest request;
  request.text = judge_prompt_template();
  for (int i = 0; i < 3; ++i) {
    if (images[i]->width < 1 || images[i]->height < 1 || images[i]->data.empty())
      throw InvalidInput(std::string("judge prompt is missing the ") + names[i] + " image");
    request.images_png.push_back(encode_png(*images[i]));
  }
  return request;
}

}  // namespace dreamer::gate
