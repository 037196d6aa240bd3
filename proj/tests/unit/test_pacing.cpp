#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coagent/pacing.hpp"

using namespace coagent;
using namespace coagent::pacing;

namespace {

synthesis::ShotArtifact artifact_of(int index, double duration) {
  synthesis::ShotArtifact a;
  a.shot_index = index;
  a.video_ref = "mock://video/" + std::to_string(index);
  a.duration_s = duration;
  a.frame_meta.assign(static_cast<std::size_t>(duration * 16), {});
  return a;
}

PacingTemplate uniform_template(Tempo tempo, Transition t = Transition{}) {
  PacingTemplate tmpl;
  tmpl.template_id = "test";
  tmpl.segments = {Segment{1, -1, tempo, std::nullopt}};
  tmpl.transition_default = t;
  return tmpl;
}

}  // namespace

TEST_CASE("retime trims from the tail only") {
  CHECK(retime(artifact_of(1, 5.0), 4.0).out_point_s == 4.0);
  CHECK(retime(artifact_of(1, 3.0), 4.0).out_point_s == 3.0);
  CHECK(retime(artifact_of(1, 5.0), 4.0).in_point_s == 0.0);
  CHECK_THROWS_AS(retime(artifact_of(1, 5.0), 0.5), PreconditionError);
}

TEST_CASE("edit: three 5s shots to 4s targets with cuts total 12s") {
  std::vector<synthesis::ShotArtifact> shots = {
      artifact_of(1, 5.0), artifact_of(2, 5.0), artifact_of(3, 5.0)};
  Timeline timeline = edit(shots, uniform_template(Tempo::medium));
  CHECK(timeline.total_duration_s == doctest::Approx(12.0));
  REQUIRE(timeline.entries.size() == 3);
  for (const auto& e : timeline.entries) {
    CHECK(e.out_point_s == doctest::Approx(4.0));
    CHECK(e.transition.kind == Transition::Kind::cut);
  }
}

TEST_CASE("edit: crossfade overlap subtracts from the total") {
  std::vector<synthesis::ShotArtifact> shots = {artifact_of(1, 4.0),
                                                artifact_of(2, 4.0)};
  PacingTemplate tmpl = uniform_template(
      Tempo::slow, Transition{Transition::Kind::crossfade, 0.5});
  Timeline timeline = edit(shots, tmpl);
  // slow default target is 6s, capped at the 4s source duration
  CHECK(timeline.total_duration_s == doctest::Approx(7.5));
  CHECK(timeline.entries[0].transition.kind == Transition::Kind::cut);
  CHECK(timeline.entries[1].transition.kind == Transition::Kind::crossfade);
}

TEST_CASE("edit: uncovered or overlapping shots fail to bind") {
  std::vector<synthesis::ShotArtifact> shots = {
      artifact_of(1, 4.0), artifact_of(2, 4.0), artifact_of(3, 4.0)};

  PacingTemplate partial;
  partial.template_id = "partial";
  partial.segments = {Segment{1, 2, Tempo::fast, std::nullopt}};
  CHECK_THROWS_AS(edit(shots, partial), TemplateBindError);

  PacingTemplate overlapping;
  overlapping.template_id = "overlap";
  overlapping.segments = {Segment{1, 2, Tempo::fast, std::nullopt},
                          Segment{2, 3, Tempo::slow, std::nullopt}};
  CHECK_THROWS_AS(edit(shots, overlapping), TemplateBindError);

  PacingTemplate oversized;
  oversized.template_id = "oversized";
  oversized.segments = {Segment{1, 5, Tempo::fast, std::nullopt}};
  CHECK_THROWS_AS(edit(shots, oversized), TemplateBindError);
}

TEST_CASE("edit: explicit segment targets and the 1s floor") {
  std::vector<synthesis::ShotArtifact> shots = {artifact_of(1, 5.0),
                                                artifact_of(2, 5.0)};
  PacingTemplate tmpl;
  tmpl.template_id = "explicit";
  tmpl.segments = {Segment{1, 1, Tempo::fast, 2.5},
                   Segment{2, 2, Tempo::fast, 0.25}};  // clamped up to 1s
  Timeline timeline = edit(shots, tmpl);
  CHECK(timeline.entries[0].out_point_s == doctest::Approx(2.5));
  CHECK(timeline.entries[1].out_point_s == doctest::Approx(1.0));
}

TEST_CASE("edit preserves shot order and source-duration bounds") {
  std::vector<synthesis::ShotArtifact> shots;
  for (int i = 1; i <= 6; ++i) {
    shots.push_back(artifact_of(i, 1.0 + (i % 3)));
  }
  Timeline timeline = edit(shots, uniform_template(Tempo::medium));
  for (std::size_t i = 0; i < timeline.entries.size(); ++i) {
    CHECK(timeline.entries[i].shot_index == static_cast<int>(i) + 1);
    CHECK(timeline.entries[i].out_point_s <=
          shots[i].duration_s + 1e-12);
  }
  // Pure function: identical inputs give identical timelines.
  Timeline again = edit(shots, uniform_template(Tempo::medium));
  CHECK(util::canonical(timeline_to_json(again)) ==
        util::canonical(timeline_to_json(timeline)));
}

TEST_CASE("empty shot list is rejected") {
  CHECK_THROWS_AS(edit({}, uniform_template(Tempo::fast)), PreconditionError);
}

TEST_CASE("builtin templates bind to any plan length") {
  for (const char* id : {"default", "fast-cuts", "slow-fades"}) {
    CAPTURE(id);
    std::vector<synthesis::ShotArtifact> shots = {artifact_of(1, 4.0),
                                                  artifact_of(2, 4.0),
                                                  artifact_of(3, 4.0)};
    CHECK_NOTHROW(edit(shots, builtin_template(id)));
  }
  CHECK_THROWS_AS(builtin_template("syncopated"), TemplateBindError);
}

TEST_CASE("timeline JSON round-trips and EDL is stable") {
  std::vector<synthesis::ShotArtifact> shots = {artifact_of(1, 5.0),
                                                artifact_of(2, 3.0)};
  PacingTemplate tmpl = uniform_template(
      Tempo::medium, Transition{Transition::Kind::crossfade, 0.5});
  Timeline timeline = edit(shots, tmpl);

  Timeline back = timeline_from_json(timeline_to_json(timeline));
  CHECK(util::canonical(timeline_to_json(back)) ==
        util::canonical(timeline_to_json(timeline)));

  const std::string edl = to_edl(timeline);
  CHECK(edl ==
        "1\tmock://video/1\t0.000\t4.000\tcut\n"
        "2\tmock://video/2\t0.000\t3.000\tcrossfade:0.5\n");
}
