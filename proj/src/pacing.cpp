#include "coagent/pacing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace coagent::pacing {

using util::Json;

Tempo tempo_from_string(const std::string& s) {
  if (s == "slow") return Tempo::slow;
  if (s == "medium") return Tempo::medium;
  if (s == "fast") return Tempo::fast;
  throw Error("unknown tempo: " + s);
}

std::string to_string(Tempo tempo) {
  switch (tempo) {
    case Tempo::slow:
      return "slow";
    case Tempo::medium:
      return "medium";
    case Tempo::fast:
      return "fast";
  }
  return "medium";
}

std::string transition_to_string(const Transition& t) {
  if (t.kind == Transition::Kind::cut) return "cut";
  std::ostringstream out;
  out << "crossfade:" << t.duration_s;
  return out.str();
}

Transition transition_from_string(const std::string& s) {
  if (s == "cut") return Transition{};
  if (s.rfind("crossfade:", 0) == 0) {
    Transition t;
    t.kind = Transition::Kind::crossfade;
    t.duration_s = std::stod(s.substr(10));
    return t;
  }
  throw Error("unknown transition: " + s);
}

double TempoDefaults::target_for(Tempo tempo) const {
  switch (tempo) {
    case Tempo::slow:
      return slow_s;
    case Tempo::medium:
      return medium_s;
    case Tempo::fast:
      return fast_s;
  }
  return medium_s;
}

TimelineEntry retime(const synthesis::ShotArtifact& artifact, double target_s) {
  if (target_s < 1.0) {
    throw PreconditionError("retime target must be at least 1 second");
  }
  TimelineEntry entry;
  entry.shot_index = artifact.shot_index;
  entry.artifact = artifact.video_ref;
  entry.in_point_s = 0.0;
  entry.out_point_s = std::min(artifact.duration_s, target_s);
  return entry;
}

Timeline edit(const std::vector<synthesis::ShotArtifact>& shots,
              const PacingTemplate& tmpl, const TempoDefaults& defaults) {
  if (shots.empty()) {
    throw PreconditionError("cannot edit an empty shot list");
  }
  const int n = static_cast<int>(shots.size());

  // Bind segment ranges: resolve open ends, then demand exact cover of 1..N.
  std::vector<int> segment_of(static_cast<std::size_t>(n), -1);
  for (std::size_t s = 0; s < tmpl.segments.size(); ++s) {
    const Segment& seg = tmpl.segments[s];
    const int last = seg.last_shot < 0 ? n : seg.last_shot;
    if (seg.first_shot < 1 || last > n || seg.first_shot > last) {
      throw TemplateBindError("segment " + std::to_string(s + 1) +
                              " range [" + std::to_string(seg.first_shot) +
                              "," + std::to_string(last) +
                              "] does not fit a " + std::to_string(n) +
                              "-shot plan");
    }
    for (int i = seg.first_shot; i <= last; ++i) {
      if (segment_of[static_cast<std::size_t>(i - 1)] != -1) {
        throw TemplateBindError("segments overlap at shot " + std::to_string(i));
      }
      segment_of[static_cast<std::size_t>(i - 1)] = static_cast<int>(s);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (segment_of[static_cast<std::size_t>(i)] == -1) {
      throw TemplateBindError("template leaves shot " + std::to_string(i + 1) +
                              " uncovered");
    }
  }

  Timeline timeline;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Segment& seg =
        tmpl.segments[static_cast<std::size_t>(segment_of[static_cast<std::size_t>(i)])];
    double target = seg.target_duration_s.value_or(defaults.target_for(seg.tempo));
    target = std::max(target, 1.0);  // trim floor

    TimelineEntry entry = retime(shots[static_cast<std::size_t>(i)], target);
    entry.transition = i == 0 ? Transition{} : tmpl.transition_default;
    total += entry.out_point_s - entry.in_point_s;
    if (i > 0 && entry.transition.kind == Transition::Kind::crossfade) {
      total -= entry.transition.duration_s;
    }
    timeline.entries.push_back(std::move(entry));
  }
  timeline.total_duration_s = total;
  return timeline;
}

PacingTemplate builtin_template(const std::string& id) {
  PacingTemplate tmpl;
  tmpl.template_id = id;
  if (id == "default" || id.empty()) {
    tmpl.template_id = "default";
    tmpl.segments = {Segment{1, -1, Tempo::medium, std::nullopt}};
    return tmpl;
  }
  if (id == "fast-cuts") {
    tmpl.segments = {Segment{1, -1, Tempo::fast, std::nullopt}};
    return tmpl;
  }
  if (id == "slow-fades") {
    tmpl.segments = {Segment{1, -1, Tempo::slow, std::nullopt}};
    tmpl.transition_default = Transition{Transition::Kind::crossfade, 0.5};
    return tmpl;
  }
  throw TemplateBindError("unknown pacing template: " + id);
}

Json timeline_to_json(const Timeline& timeline) {
  Json j;
  Json entries = Json::array();
  for (const auto& e : timeline.entries) {
    entries.push_back(Json{{"artifact", e.artifact},
                           {"in_point_s", e.in_point_s},
                           {"out_point_s", e.out_point_s},
                           {"shot_index", e.shot_index},
                           {"transition", transition_to_string(e.transition)}});
  }
  j["entries"] = entries;
  j["total_duration_s"] = timeline.total_duration_s;
  return j;
}

Timeline timeline_from_json(const Json& j) {
  Timeline t;
  t.total_duration_s = j.at("total_duration_s").get<double>();
  for (const auto& e : j.at("entries")) {
    TimelineEntry entry;
    entry.artifact = e.at("artifact").get<std::string>();
    entry.in_point_s = e.at("in_point_s").get<double>();
    entry.out_point_s = e.at("out_point_s").get<double>();
    entry.shot_index = e.at("shot_index").get<int>();
    entry.transition = transition_from_string(e.at("transition").get<std::string>());
    t.entries.push_back(std::move(entry));
  }
  return t;
}

std::string to_edl(const Timeline& timeline) {
  std::ostringstream out;
  char buf[64];
  for (const auto& e : timeline.entries) {
    std::snprintf(buf, sizeof(buf), "%.3f\t%.3f", e.in_point_s, e.out_point_s);
    out << e.shot_index << '\t' << e.artifact << '\t' << buf << '\t'
        << transition_to_string(e.transition) << '\n';
  }
  return out.str();
}

}  // namespace coagent::pacing
