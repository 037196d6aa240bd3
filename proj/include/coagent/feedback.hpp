#pragma once

#include <string>
#include <vector>

#include "coagent/util/errors.hpp"

namespace coagent {

// Typed reviewer feedback attached to a failed verification. Semantic kinds
// route to prompt refinement, appearance kinds route to mode escalation.
enum class FeedbackKind {
  semantic_mismatch,
  missing_entity,
  appearance_inconsistency,
  temporal_discontinuity,
};

struct Feedback {
  FeedbackKind kind = FeedbackKind::semantic_mismatch;
  std::string detail;
  std::vector<std::string> offending_entities;
};

inline bool is_semantic(FeedbackKind k) {
  return k == FeedbackKind::semantic_mismatch ||
         k == FeedbackKind::missing_entity;
}

inline bool is_appearance(FeedbackKind k) {
  return k == FeedbackKind::appearance_inconsistency ||
         k == FeedbackKind::temporal_discontinuity;
}

inline std::string to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::semantic_mismatch:
      return "semantic_mismatch";
    case FeedbackKind::missing_entity:
      return "missing_entity";
    case FeedbackKind::appearance_inconsistency:
      return "appearance_inconsistency";
    case FeedbackKind::temporal_discontinuity:
      return "temporal_discontinuity";
  }
  return "semantic_mismatch";
}

inline FeedbackKind feedback_kind_from_string(const std::string& s) {
  if (s == "semantic_mismatch") return FeedbackKind::semantic_mismatch;
  if (s == "missing_entity") return FeedbackKind::missing_entity;
  if (s == "appearance_inconsistency")
    return FeedbackKind::appearance_inconsistency;
  if (s == "temporal_discontinuity")
    return FeedbackKind::temporal_discontinuity;
  throw Error("unknown feedback kind: " + s);
}

}  // namespace coagent
