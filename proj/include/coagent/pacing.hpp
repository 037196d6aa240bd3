#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coagent/synthesis.hpp"
#include "coagent/util/json.hpp"

namespace coagent::pacing {

enum class Tempo { slow, medium, fast };

Tempo tempo_from_string(const std::string& s);
std::string to_string(Tempo tempo);

struct Transition {
  enum class Kind { cut, crossfade };
  Kind kind = Kind::cut;
  double duration_s = 0.0;  // crossfade overlap

  bool operator==(const Transition&) const = default;
};

std::string transition_to_string(const Transition& t);
Transition transition_from_string(const std::string& s);

struct Segment {
  int first_shot = 1;
  int last_shot = -1;  // -1 binds to the final shot
  Tempo tempo = Tempo::medium;
  std::optional<double> target_duration_s;
};

struct PacingTemplate {
  std::string template_id;
  std::vector<Segment> segments;
  Transition transition_default;
};

struct TimelineEntry {
  int shot_index = 0;
  std::string artifact;
  double in_point_s = 0.0;
  double out_point_s = 0.0;
  Transition transition;  // transition into this entry; first entry is a cut

  bool operator==(const TimelineEntry&) const = default;
};

struct Timeline {
  std::vector<TimelineEntry> entries;
  double total_duration_s = 0.0;
};

struct TempoDefaults {
  double slow_s = 6.0;
  double medium_s = 4.0;
  double fast_s = 2.0;

  double target_for(Tempo tempo) const;
};

// Tail-trim-only retiming: out point capped at the artifact duration, no
// frame resampling. target_s must be >= 1 second.
TimelineEntry retime(const synthesis::ShotArtifact& artifact, double target_s);

// Retimes each shot toward its segment target and inserts the template's
// transitions. Throws TemplateBindError when segments do not cover 1..N
// exactly once.
Timeline edit(const std::vector<synthesis::ShotArtifact>& shots,
              const PacingTemplate& tmpl, const TempoDefaults& defaults = {});

// Built-in templates: "default" (medium, cuts), "fast-cuts" (fast, cuts),
// "slow-fades" (slow, 0.5 s crossfades).
PacingTemplate builtin_template(const std::string& id);

util::Json timeline_to_json(const Timeline& timeline);
Timeline timeline_from_json(const util::Json& j);

// One line per entry: index, artifact, in, out, transition.
std::string to_edl(const Timeline& timeline);

}  // namespace coagent::pacing
