#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coagent/feedback.hpp"
#include "coagent/util/errors.hpp"
#include "coagent/util/json.hpp"

namespace coagent::storyboard {

// Shot generation modes, in escalation order (t2v < ff2v < flf2v).
enum class GenerationMode { t2v, ff2v, flf2v };

std::string to_string(GenerationMode mode);
GenerationMode mode_from_string(const std::string& s);

// The user-facing concept a run starts from.
struct Idea {
  std::string concept_text;
  std::optional<std::string> style_ref;
  std::optional<std::string> pacing_template_id;
  std::string language_tag = "en";
};

struct CharacterDecl {
  std::string id;
  std::string name;
  std::string static_features;
};

struct Relation {
  std::string subject;
  std::string predicate;
  std::string object;

  bool operator==(const Relation&) const = default;
};

struct ShotSpec {
  int index = 0;
  std::string prompt;
  std::vector<std::string> entities;
  std::vector<Relation> relations;
  std::string style;
  double duration_s = 0.0;
  GenerationMode generation_mode = GenerationMode::ff2v;
  std::string camera_angle;
  std::string lighting;
  std::string first_frame_prompt;
  std::optional<std::string> last_frame_prompt;
  bool connect_to_next = false;
  std::optional<std::string> audio;

  bool operator==(const ShotSpec&) const = default;
};

struct StoryboardPlan {
  std::string title;
  std::string target_audience;
  std::string genre;
  std::string style;
  std::string pacing;
  std::string logline;
  std::vector<CharacterDecl> characters;
  std::vector<ShotSpec> shots;

  bool has_character(const std::string& id) const;
};

inline bool operator==(const CharacterDecl& a, const CharacterDecl& b) {
  return a.id == b.id && a.name == b.name &&
         a.static_features == b.static_features;
}

inline bool operator==(const StoryboardPlan& a, const StoryboardPlan& b) {
  return a.title == b.title && a.target_audience == b.target_audience &&
         a.genre == b.genre && a.style == b.style && a.pacing == b.pacing &&
         a.logline == b.logline && a.characters == b.characters &&
         a.shots == b.shots;
}

struct Violation {
  std::string where;    // "plan" or "shot <i>"
  std::string rule_id;  // machine-readable, e.g. "unknown_entity"
  std::string message;
};

struct PlanValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

class PlanParseError : public Error {
 public:
  explicit PlanParseError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const { return violations_; }
  bool has_rule(const std::string& rule_id) const;

 private:
  std::vector<Violation> violations_;
};

// Completion-style planner backend. Implementations must be safe for
// concurrent use.
class PlannerClient {
 public:
  virtual ~PlannerClient() = default;
  virtual std::string complete(const std::string& system_prompt,
                               const std::string& user_message) = 0;
};

// Strict parse: unknown fields rejected at every level, all invariants
// enforced. Throws PlanParseError with one violation per broken rule.
StoryboardPlan parse_plan_json(std::string_view bytes);

// Canonical UTF-8 JSON, keys sorted, no insignificant whitespace.
// parse_plan_json(serialize_plan(p)) == p, byte-stable.
std::string serialize_plan(const StoryboardPlan& plan);

util::Json plan_to_json(const StoryboardPlan& plan);
util::Json shot_to_json(const ShotSpec& shot);
ShotSpec shot_from_json(const util::Json& j, std::vector<Violation>* out,
                        const std::string& where);

// Semantic re-validation of an already-typed plan.
PlanValidationReport validate_plan(const StoryboardPlan& plan);

struct PlanOptions {
  int shot_cap = 24;  // engine bound on planner-chosen N
};

// Prompts the planner with the storyboard instruction plus the serialized
// idea. One repair round-trip on schema violation, then PlanParseError.
StoryboardPlan plan(const Idea& idea, PlannerClient& planner,
                    const PlanOptions& options = {});

// Rewrites shot prompts from semantic feedback. Index, mode and duration
// are preserved; the entity set may grow but never shrinks.
ShotSpec refine_semantic(const ShotSpec& shot, const Feedback& feedback,
                         PlannerClient& planner);

}  // namespace coagent::storyboard
