#include "coagent/prompts.hpp"

namespace coagent::prompts {

namespace {

const char kPlannerSystem[] =
    R"(Role: You are a professional screenwriter and storyboard planner.

Task: Infer a reasonable number of shots N from pacing and target duration, then output EXACTLY N detailed shots with filmable visuals. For each shot, decide the video generation mode: ff2v (only first frame) or flf2v (first & last frames).

Guidelines:
- Language must follow the user's language.
- EXACTLY N shots; choose N based on pacing and duration.
- Filmable and concrete; avoid abstract emotions.
- Pick flf2v when the shot requires a clear start -> end transition or long continuous motion; otherwise ff2v.
- If generation mode is flf2v, you MUST provide last_frame_prompt that logically matches motion and can connect to the next shot.
- If generation mode is ff2v and seamless continuity to next is needed, set connect_to_next=true.
- Output STRICT JSON only.
)";

const char kPlannerSchema[] =
    R"(Output a single strict JSON object with exactly these keys:
- "title", "target_audience", "genre", "style", "pacing", "logline": strings (global metadata).
- "characters": array of objects, each with a unique "id", a "name", and "static_features" describing persistent appearance.
- "shots": ordered array of shot objects. Each shot object has exactly:
  "index" (1-based integer), "prompt", "entities" (array of character ids),
  "relations" (array of {"subject","predicate","object"} over character ids),
  "style", "duration_s" (seconds, > 0), "generation_mode" ("t2v"|"ff2v"|"flf2v"),
  "camera_angle", "lighting", "first_frame_prompt",
  "last_frame_prompt" (required when generation_mode is "flf2v", otherwise omit),
  "connect_to_next" (boolean), and optionally "audio".
No other keys are allowed anywhere. No prose, no code fences.
)";

const char kPlannerRefine[] =
    R"(You are revising exactly one shot of an existing storyboard to address reviewer feedback.
Rewrite "prompt" and "first_frame_prompt" (and "last_frame_prompt" when present) so the feedback is resolved.
You MUST keep "index", "generation_mode" and "duration_s" unchanged. You may add entities but never remove any.
Output STRICT JSON only: the single revised shot object, same schema as before.
)";

const char kVerifierStage1[] =
    R"(Act as a professional film reviewer. Judge solely based on the provided frame:
Script Description: [Script Description]
Requirement: Answer only PASS or FAIL; if FAIL, briefly explain the mismatch point (under 20 words).)";

const char kVerifierStage2[] =
    R"(Strictly compare whether the same character in the two images is consistent:
Image 1: Master Portrait (GCM Reference);
Image 2: Video Frame.
Requirement: Answer only PASS or FAIL; if FAIL, briefly explain the difference (under 20 words).)";

const char kPortrait[] =
    R"(Generate a clean character portrait (setup shot):
Character: [Character Description]
Style: [Style Description or 'Default']
Requirements: Front view, pure white background, cinematic lighting, clear facial features, full body or half body shot.)";

std::string replace_once(std::string text, const std::string& slot,
                         const std::string& value) {
  auto pos = text.find(slot);
  if (pos != std::string::npos) {
    text.replace(pos, slot.size(), value);
  }
  return text;
}

}  // namespace

const std::string& planner_system() {
  static const std::string v = kPlannerSystem;
  return v;
}

const std::string& planner_schema() {
  static const std::string v = kPlannerSchema;
  return v;
}

const std::string& planner_refine() {
  static const std::string v = kPlannerRefine;
  return v;
}

const std::string& verifier_stage1_template() {
  static const std::string v = kVerifierStage1;
  return v;
}

const std::string& verifier_stage2_template() {
  static const std::string v = kVerifierStage2;
  return v;
}

const std::string& portrait_template() {
  static const std::string v = kPortrait;
  return v;
}

std::string render_stage1(const std::string& script_description) {
  return replace_once(verifier_stage1_template(), "[Script Description]",
                      script_description);
}

std::string render_stage2() { return verifier_stage2_template(); }

std::string render_portrait(const std::string& character_description,
                            const std::string& style) {
  std::string out = replace_once(portrait_template(), "[Character Description]",
                                 character_description);
  return replace_once(out, "[Style Description or 'Default']",
                      style.empty() ? "Default" : style);
}

}  // namespace coagent::prompts
