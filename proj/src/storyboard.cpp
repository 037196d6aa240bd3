#include "coagent/storyboard.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "coagent/prompts.hpp"

namespace coagent::storyboard {

using util::Json;

std::string to_string(GenerationMode mode) {
  switch (mode) {
    case GenerationMode::t2v:
      return "t2v";
    case GenerationMode::ff2v:
      return "ff2v";
    case GenerationMode::flf2v:
      return "flf2v";
  }
  return "t2v";
}

GenerationMode mode_from_string(const std::string& s) {
  if (s == "t2v") return GenerationMode::t2v;
  if (s == "ff2v") return GenerationMode::ff2v;
  if (s == "flf2v") return GenerationMode::flf2v;
  throw Error("unknown generation mode: " + s);
}

bool StoryboardPlan::has_character(const std::string& id) const {
  return std::any_of(characters.begin(), characters.end(),
                     [&](const CharacterDecl& c) { return c.id == id; });
}

namespace {

std::string format_violations(const std::vector<Violation>& vs) {
  std::ostringstream out;
  out << "plan validation failed:";
  for (const auto& v : vs) {
    out << "\n  " << v.where << " [" << v.rule_id << "]: " << v.message;
  }
  return out.str();
}

void note(std::vector<Violation>* out, const std::string& where,
          const std::string& rule, const std::string& msg) {
  out->push_back(Violation{where, rule, msg});
}

bool expect_string(const Json& j, const char* key, const std::string& where,
                   std::vector<Violation>* out, std::string* dst,
                   bool required = true) {
  if (!j.contains(key)) {
    if (required) note(out, where, "missing_field", std::string(key));
    return false;
  }
  if (!j.at(key).is_string()) {
    note(out, where, "wrong_type", std::string(key) + " must be a string");
    return false;
  }
  *dst = j.at(key).get<std::string>();
  return true;
}

}  // namespace

PlanParseError::PlanParseError(std::vector<Violation> violations)
    : Error(format_violations(violations)), violations_(std::move(violations)) {}

bool PlanParseError::has_rule(const std::string& rule_id) const {
  return std::any_of(violations_.begin(), violations_.end(),
                     [&](const Violation& v) { return v.rule_id == rule_id; });
}

Json shot_to_json(const ShotSpec& shot) {
  Json j;
  if (shot.audio) j["audio"] = *shot.audio;
  j["camera_angle"] = shot.camera_angle;
  j["connect_to_next"] = shot.connect_to_next;
  j["duration_s"] = shot.duration_s;
  j["entities"] = shot.entities;
  j["first_frame_prompt"] = shot.first_frame_prompt;
  j["generation_mode"] = to_string(shot.generation_mode);
  j["index"] = shot.index;
  if (shot.last_frame_prompt) j["last_frame_prompt"] = *shot.last_frame_prompt;
  j["lighting"] = shot.lighting;
  j["prompt"] = shot.prompt;
  Json rels = Json::array();
  for (const auto& r : shot.relations) {
    rels.push_back(
        Json{{"object", r.object}, {"predicate", r.predicate}, {"subject", r.subject}});
  }
  j["relations"] = rels;
  j["style"] = shot.style;
  return j;
}

ShotSpec shot_from_json(const Json& j, std::vector<Violation>* out,
                        const std::string& where) {
  ShotSpec shot;
  if (!j.is_object()) {
    note(out, where, "wrong_type", "shot must be an object");
    return shot;
  }
  for (const auto& key : util::unknown_keys(
           j, {"audio", "camera_angle", "connect_to_next", "duration_s",
               "entities", "first_frame_prompt", "generation_mode", "index",
               "last_frame_prompt", "lighting", "prompt", "relations",
               "style"})) {
    note(out, where, "unknown_field", key);
  }

  if (j.contains("index") && j.at("index").is_number_integer()) {
    shot.index = j.at("index").get<int>();
  } else {
    note(out, where, j.contains("index") ? "wrong_type" : "missing_field",
         "index");
  }

  expect_string(j, "prompt", where, out, &shot.prompt);
  expect_string(j, "style", where, out, &shot.style);
  expect_string(j, "camera_angle", where, out, &shot.camera_angle);
  expect_string(j, "lighting", where, out, &shot.lighting);
  expect_string(j, "first_frame_prompt", where, out, &shot.first_frame_prompt);

  if (j.contains("last_frame_prompt")) {
    std::string lfp;
    if (expect_string(j, "last_frame_prompt", where, out, &lfp)) {
      shot.last_frame_prompt = lfp;
    }
  }
  if (j.contains("audio")) {
    std::string audio;
    if (expect_string(j, "audio", where, out, &audio)) shot.audio = audio;
  }

  if (j.contains("duration_s") && j.at("duration_s").is_number()) {
    shot.duration_s = j.at("duration_s").get<double>();
    if (!(shot.duration_s > 0)) {
      note(out, where, "nonpositive_duration",
           "duration_s must be > 0 seconds");
    }
  } else {
    note(out, where,
         j.contains("duration_s") ? "wrong_type" : "missing_field",
         "duration_s");
  }

  if (j.contains("generation_mode") && j.at("generation_mode").is_string()) {
    try {
      shot.generation_mode =
          mode_from_string(j.at("generation_mode").get<std::string>());
    } catch (const Error&) {
      note(out, where, "bad_mode",
           "generation_mode must be one of t2v|ff2v|flf2v");
    }
  } else {
    note(out, where,
         j.contains("generation_mode") ? "wrong_type" : "missing_field",
         "generation_mode");
  }

  if (j.contains("connect_to_next") && j.at("connect_to_next").is_boolean()) {
    shot.connect_to_next = j.at("connect_to_next").get<bool>();
  } else {
    note(out, where,
         j.contains("connect_to_next") ? "wrong_type" : "missing_field",
         "connect_to_next");
  }

  if (j.contains("entities") && j.at("entities").is_array()) {
    for (const auto& e : j.at("entities")) {
      if (!e.is_string()) {
        note(out, where, "wrong_type", "entities must be strings");
        continue;
      }
      shot.entities.push_back(e.get<std::string>());
    }
  } else {
    note(out, where, j.contains("entities") ? "wrong_type" : "missing_field",
         "entities");
  }

  if (j.contains("relations") && j.at("relations").is_array()) {
    for (const auto& r : j.at("relations")) {
      if (!r.is_object()) {
        note(out, where, "wrong_type", "relation must be an object");
        continue;
      }
      for (const auto& key :
           util::unknown_keys(r, {"object", "predicate", "subject"})) {
        note(out, where, "unknown_field", "relations." + key);
      }
      Relation rel;
      bool ok = expect_string(r, "subject", where, out, &rel.subject);
      ok = expect_string(r, "predicate", where, out, &rel.predicate) && ok;
      ok = expect_string(r, "object", where, out, &rel.object) && ok;
      if (ok) shot.relations.push_back(rel);
    }
  } else {
    note(out, where, j.contains("relations") ? "wrong_type" : "missing_field",
         "relations");
  }

  if (shot.generation_mode == GenerationMode::flf2v &&
      (!shot.last_frame_prompt || shot.last_frame_prompt->empty())) {
    note(out, where, "missing_last_frame_prompt",
         "flf2v shots must provide a non-empty last_frame_prompt");
  }
  return shot;
}

Json plan_to_json(const StoryboardPlan& plan) {
  Json j;
  Json chars = Json::array();
  for (const auto& c : plan.characters) {
    chars.push_back(Json{{"id", c.id},
                         {"name", c.name},
                         {"static_features", c.static_features}});
  }
  j["characters"] = chars;
  j["genre"] = plan.genre;
  j["logline"] = plan.logline;
  j["pacing"] = plan.pacing;
  Json shots = Json::array();
  for (const auto& s : plan.shots) shots.push_back(shot_to_json(s));
  j["shots"] = shots;
  j["style"] = plan.style;
  j["target_audience"] = plan.target_audience;
  j["title"] = plan.title;
  return j;
}

std::string serialize_plan(const StoryboardPlan& plan) {
  return util::canonical(plan_to_json(plan));
}

namespace {

// Cross-shot invariants shared by parse and validate.
void check_plan_semantics(const StoryboardPlan& plan,
                          std::vector<Violation>* out) {
  if (plan.shots.empty()) {
    note(out, "plan", "empty_plan", "plan must contain at least one shot");
  }

  std::set<std::string> ids;
  for (const auto& c : plan.characters) {
    if (!ids.insert(c.id).second) {
      note(out, "plan", "duplicate_character", "duplicate character id " + c.id);
    }
    if (c.static_features.empty()) {
      note(out, "plan", "empty_static_features",
           "character " + c.id + " must declare static_features");
    }
    if (c.id.empty()) {
      note(out, "plan", "empty_character_id", "character id must be non-empty");
    }
  }

  for (std::size_t i = 0; i < plan.shots.size(); ++i) {
    const ShotSpec& s = plan.shots[i];
    const std::string where = "shot " + std::to_string(i + 1);
    if (s.index != static_cast<int>(i) + 1) {
      note(out, where, "bad_shot_index",
           "shot indices must be exactly 1..N contiguous, got " +
               std::to_string(s.index));
    }
    for (const auto& e : s.entities) {
      if (!ids.count(e)) {
        note(out, where, "unknown_entity",
             "entity " + e + " is not in the character registry");
      }
    }
    for (const auto& r : s.relations) {
      if (!ids.count(r.subject)) {
        note(out, where, "unknown_entity",
             "relation subject " + r.subject + " is not registered");
      }
      if (!ids.count(r.object)) {
        note(out, where, "unknown_entity",
             "relation object " + r.object + " is not registered");
      }
    }
    if (s.generation_mode == GenerationMode::flf2v &&
        (!s.last_frame_prompt || s.last_frame_prompt->empty())) {
      note(out, where, "missing_last_frame_prompt",
           "flf2v shots must provide a non-empty last_frame_prompt");
    }
    if (!(s.duration_s > 0)) {
      note(out, where, "nonpositive_duration", "duration_s must be > 0");
    }
  }
}

}  // namespace

StoryboardPlan parse_plan_json(std::string_view bytes) {
  std::vector<Violation> violations;

  Json j = Json::parse(bytes, nullptr, false);
  if (j.is_discarded()) {
    throw PlanParseError({Violation{"plan", "not_json", "input is not JSON"}});
  }
  if (!j.is_object()) {
    throw PlanParseError(
        {Violation{"plan", "root_not_object", "plan root must be an object"}});
  }

  for (const auto& key : util::unknown_keys(
           j, {"characters", "genre", "logline", "pacing", "shots", "style",
               "target_audience", "title"})) {
    note(&violations, "plan", "unknown_field", key);
  }

  StoryboardPlan plan;
  expect_string(j, "title", "plan", &violations, &plan.title);
  expect_string(j, "target_audience", "plan", &violations,
                &plan.target_audience);
  expect_string(j, "genre", "plan", &violations, &plan.genre);
  expect_string(j, "style", "plan", &violations, &plan.style);
  expect_string(j, "pacing", "plan", &violations, &plan.pacing);
  expect_string(j, "logline", "plan", &violations, &plan.logline);

  if (j.contains("characters") && j.at("characters").is_array()) {
    for (const auto& c : j.at("characters")) {
      if (!c.is_object()) {
        note(&violations, "plan", "wrong_type", "character must be an object");
        continue;
      }
      for (const auto& key :
           util::unknown_keys(c, {"id", "name", "static_features"})) {
        note(&violations, "plan", "unknown_field", "characters." + key);
      }
      CharacterDecl decl;
      expect_string(c, "id", "plan", &violations, &decl.id);
      expect_string(c, "name", "plan", &violations, &decl.name);
      expect_string(c, "static_features", "plan", &violations,
                    &decl.static_features);
      plan.characters.push_back(decl);
    }
  } else {
    note(&violations, "plan",
         j.contains("characters") ? "wrong_type" : "missing_field",
         "characters");
  }

  if (j.contains("shots") && j.at("shots").is_array()) {
    int n = 1;
    for (const auto& s : j.at("shots")) {
      plan.shots.push_back(
          shot_from_json(s, &violations, "shot " + std::to_string(n)));
      ++n;
    }
  } else {
    note(&violations, "plan",
         j.contains("shots") ? "wrong_type" : "missing_field", "shots");
  }

  check_plan_semantics(plan, &violations);

  // shot_from_json already reported per-shot flf2v violations; drop the
  // duplicates produced by the plan-level sweep.
  std::vector<Violation> unique;
  for (const auto& v : violations) {
    bool dup = std::any_of(unique.begin(), unique.end(), [&](const Violation& u) {
      return u.where == v.where && u.rule_id == v.rule_id &&
             u.message == v.message;
    });
    if (!dup) unique.push_back(v);
  }
  if (!unique.empty()) throw PlanParseError(std::move(unique));
  return plan;
}

PlanValidationReport validate_plan(const StoryboardPlan& plan) {
  PlanValidationReport report;
  check_plan_semantics(plan, &report.violations);
  report.ok = report.violations.empty();
  return report;
}

namespace {

std::string idea_user_message(const Idea& idea) {
  Json j;
  j["concept"] = idea.concept_text;
  j["language"] = idea.language_tag;
  if (idea.pacing_template_id) j["pacing_template"] = *idea.pacing_template_id;
  if (idea.style_ref) j["style_ref"] = *idea.style_ref;
  return "Concept brief (JSON):\n" + util::canonical(j);
}

std::string repair_message(const std::string& original_user,
                           const std::vector<Violation>& violations) {
  std::ostringstream out;
  out << original_user
      << "\n\nYour previous output violated the required schema:";
  for (const auto& v : violations) {
    out << "\n- " << v.where << " [" << v.rule_id << "]: " << v.message;
  }
  out << "\nReturn the corrected STRICT JSON object only.";
  return out.str();
}

}  // namespace

StoryboardPlan plan(const Idea& idea, PlannerClient& planner,
                    const PlanOptions& options) {
  std::string trimmed = idea.concept_text;
  const auto first = trimmed.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    throw PreconditionError("idea concept_text must be non-empty");
  }

  const std::string system =
      prompts::planner_system() + "\n" + prompts::planner_schema();
  const std::string user = idea_user_message(idea);

  auto attempt = [&](const std::string& user_msg) -> StoryboardPlan {
    const std::string raw = planner.complete(system, user_msg);
    StoryboardPlan p = parse_plan_json(raw);
    if (static_cast<int>(p.shots.size()) > options.shot_cap) {
      throw PlanParseError({Violation{
          "plan", "too_many_shots",
          "plan has " + std::to_string(p.shots.size()) +
              " shots, cap is " + std::to_string(options.shot_cap)}});
    }
    return p;
  };

  try {
    return attempt(user);
  } catch (const PlanParseError& first_error) {
    // Exactly one repair round-trip: violations are appended to the prompt.
    return attempt(repair_message(user, first_error.violations()));
  }
}

ShotSpec refine_semantic(const ShotSpec& shot, const Feedback& feedback,
                         PlannerClient& planner) {
  if (!is_semantic(feedback.kind)) {
    throw PreconditionError(
        "refine_semantic requires semantic feedback, got " +
        to_string(feedback.kind));
  }

  Json user;
  user["feedback"] = Json{{"detail", feedback.detail},
                          {"kind", to_string(feedback.kind)},
                          {"offending_entities", feedback.offending_entities}};
  user["shot"] = shot_to_json(shot);

  const std::string raw = planner.complete(
      prompts::planner_refine(), "Revision request (JSON):\n" + util::canonical(user));

  Json j = Json::parse(raw, nullptr, false);
  if (j.is_discarded()) {
    throw PlanParseError(
        {Violation{"shot " + std::to_string(shot.index), "not_json",
                   "refined shot is not JSON"}});
  }
  std::vector<Violation> violations;
  ShotSpec refined =
      shot_from_json(j, &violations, "shot " + std::to_string(shot.index));
  if (!violations.empty()) throw PlanParseError(std::move(violations));

  const std::string where = "shot " + std::to_string(shot.index);
  if (refined.index != shot.index) {
    violations.push_back({where, "refine_contract", "shot index changed"});
  }
  if (refined.generation_mode != shot.generation_mode) {
    violations.push_back({where, "refine_contract", "generation_mode changed"});
  }
  if (refined.duration_s != shot.duration_s) {
    violations.push_back({where, "refine_contract", "duration_s changed"});
  }
  for (const auto& e : shot.entities) {
    if (std::find(refined.entities.begin(), refined.entities.end(), e) ==
        refined.entities.end()) {
      violations.push_back({where, "refine_contract", "entity " + e + " removed"});
    }
  }
  if (!violations.empty()) throw PlanParseError(std::move(violations));
  return refined;
}

}  // namespace coagent::storyboard
