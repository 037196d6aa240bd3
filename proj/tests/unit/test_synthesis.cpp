#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coagent/backends/mock.hpp"
#include "coagent/synthesis.hpp"
#include "support/testenv.hpp"

using namespace coagent;
using namespace coagent::synthesis;
namespace ts = coagent::testsupport;

namespace {

storyboard::ShotSpec make_shot(int index, Mode declared) {
  storyboard::ShotSpec shot;
  shot.index = index;
  shot.prompt = "prompt";
  shot.style = "style";
  shot.duration_s = 3.0;
  shot.generation_mode = declared;
  shot.first_frame_prompt = "first";
  if (declared == Mode::flf2v) shot.last_frame_prompt = "last";
  return shot;
}

}  // namespace

TEST_CASE("default mode parameters match the production table exactly") {
  ModeParamsTable table;
  CHECK(table.t2v.width == 832);
  CHECK(table.t2v.height == 480);
  CHECK(table.t2v.steps == 40);
  CHECK(table.ff2v.width == 832);
  CHECK(table.ff2v.height == 480);
  CHECK(table.ff2v.steps == 30);
  CHECK(table.flf2v.width == 1280);
  CHECK(table.flf2v.height == 720);
  CHECK(table.flf2v.steps == 30);
}

TEST_CASE("select_mode truth table over every policy branch") {
  const double tau = 0.9;
  const double d = 0.05;
  struct Row {
    std::optional<double> prev;
    double overlap;
    int index;
    Mode declared;
    bool flf2v_enabled;
    Mode expected;
  };
  // Hand-derived expectations; band edges use tau +/- delta = [0.85, 0.95].
  const std::vector<Row> rows = {
      // (1) first shot / absent score always t2v
      {std::nullopt, 0.0, 1, Mode::ff2v, true, Mode::t2v},
      {std::nullopt, 1.0, 1, Mode::flf2v, true, Mode::t2v},
      {std::nullopt, 0.7, 2, Mode::ff2v, true, Mode::t2v},
      {0.95, 0.5, 1, Mode::t2v, true, Mode::t2v},
      // (2) isolated shots
      {0.95, 0.0, 2, Mode::ff2v, true, Mode::t2v},
      {0.70, 0.0, 3, Mode::flf2v, true, Mode::t2v},
      {0.70, 0.0, 3, Mode::flf2v, false, Mode::t2v},
      // (3) planner-declared flf2v honored whenever enabled
      {0.90, 0.5, 2, Mode::flf2v, true, Mode::flf2v},
      {0.99, 1.0, 4, Mode::flf2v, true, Mode::flf2v},
      {0.70, 0.3, 2, Mode::flf2v, true, Mode::flf2v},
      {0.90, 0.5, 2, Mode::flf2v, false, Mode::ff2v},
      {0.99, 1.0, 4, Mode::flf2v, false, Mode::ff2v},
      // (4) margin band -> ff2v
      {0.90, 0.5, 2, Mode::ff2v, true, Mode::ff2v},
      {0.85, 0.5, 2, Mode::ff2v, true, Mode::ff2v},
      {0.95, 0.5, 2, Mode::ff2v, true, Mode::ff2v},
      {0.90, 1.0, 3, Mode::t2v, true, Mode::ff2v},
      // (5) weak previous shot -> flf2v (ff2v when disabled)
      {0.70, 0.5, 2, Mode::ff2v, true, Mode::flf2v},
      {0.849, 0.2, 3, Mode::ff2v, true, Mode::flf2v},
      {0.70, 0.5, 2, Mode::ff2v, false, Mode::ff2v},
      {0.0, 1.0, 2, Mode::t2v, true, Mode::flf2v},
      // (6) healthy previous shot continues with ff2v
      {0.96, 0.5, 2, Mode::ff2v, true, Mode::ff2v},
      {1.0, 1.0, 4, Mode::t2v, true, Mode::ff2v},
      {0.96, 0.5, 2, Mode::ff2v, false, Mode::ff2v},
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    CAPTURE(i);
    const storyboard::ShotSpec shot = make_shot(row.index, row.declared);
    CHECK(select_mode(row.prev, tau, row.overlap, shot, row.flf2v_enabled, d) ==
          row.expected);
    // Purity: a second evaluation agrees.
    CHECK(select_mode(row.prev, tau, row.overlap, shot, row.flf2v_enabled, d) ==
          row.expected);
  }
}

TEST_CASE("select_mode validates its inputs") {
  const auto shot = make_shot(2, Mode::ff2v);
  CHECK_THROWS_AS(select_mode(0.5, 0.0, 0.5, shot, true), PreconditionError);
  CHECK_THROWS_AS(select_mode(0.5, 0.9, 1.5, shot, true), PreconditionError);
}

TEST_CASE("escalate_mode climbs and saturates") {
  CHECK(escalate_mode(Mode::t2v, true) == Mode::ff2v);
  CHECK(escalate_mode(Mode::ff2v, true) == Mode::flf2v);
  CHECK(escalate_mode(Mode::flf2v, true) == Mode::flf2v);
  CHECK(escalate_mode(Mode::ff2v, false) == Mode::ff2v);
  CHECK(escalate_mode(Mode::t2v, false) == Mode::ff2v);
}

namespace {

gcm::MemoryStore two_entity_store(gcm::FeatureExtractor& extractor) {
  gcm::MemoryStore store;
  store = gcm::register_entity(store, {"hero", "Hero", "red scarf"},
                               gcm::ArtifactRef{"portraits/hero.txt", "d1"},
                               "portrait|hero", extractor);
  store = gcm::register_entity(store, {"sidekick", "Sidekick", "blue cap"},
                               gcm::ArtifactRef{"portraits/sidekick.txt", "d2"},
                               "portrait|sidekick", extractor);
  return store;
}

}  // namespace

TEST_CASE("build_request carries exactly the shot's records") {
  backends::HashFeatureExtractor extractor(32);
  auto store = two_entity_store(extractor);
  auto shot = make_shot(1, Mode::t2v);
  shot.entities = {"hero"};

  gcm::LookupMeter meter;
  auto request = build_request(shot, Mode::t2v, store, std::nullopt, false,
                               ModeParamsTable{}, 7, true, &meter);
  REQUIRE(request.entity_records.size() == 1);
  CHECK(request.entity_records[0].entity_id == "hero");
  CHECK(request.backend_params == ModeParamsTable{}.t2v);
  CHECK(request.seed == 7);
  CHECK(meter.lookups == 1);
  CHECK_FALSE(request.first_frame_anchor.has_value());
}

TEST_CASE("build_request rejects unregistered entities") {
  backends::HashFeatureExtractor extractor(32);
  auto store = two_entity_store(extractor);
  auto shot = make_shot(1, Mode::t2v);
  shot.entities = {"stranger"};
  CHECK_THROWS_AS(build_request(shot, Mode::t2v, store, std::nullopt, false,
                                ModeParamsTable{}, 7, true),
                  UnknownEntity);
}

TEST_CASE("ff2v anchoring locks onto the previous artifact's final frame") {
  backends::HashFeatureExtractor extractor(32);
  auto store = two_entity_store(extractor);

  ShotArtifact prev;
  prev.shot_index = 2;
  prev.video_ref = "mock://video/prev";
  prev.duration_s = 3.0;
  prev.frame_meta.assign(48, {{"hero", "tok:ab"}});
  prev.frame_meta.back()["hero"] = "tok:final";

  auto shot = make_shot(3, Mode::ff2v);
  shot.entities = {"hero"};
  auto request = build_request(shot, Mode::ff2v, store, prev, true,
                               ModeParamsTable{}, 9, true);
  REQUIRE(request.first_frame_anchor.has_value());
  CHECK(request.first_frame_anchor->kind == FrameRef::Kind::artifact_frame);
  CHECK(request.first_frame_anchor->frame_index == 47);
  CHECK(request.first_frame_anchor->video_ref == "mock://video/prev");
  CHECK(request.first_frame_anchor->tokens.at("hero") == "tok:final");
}

TEST_CASE("ff2v continuity without a previous artifact is an error") {
  backends::HashFeatureExtractor extractor(32);
  auto store = two_entity_store(extractor);
  auto shot = make_shot(3, Mode::ff2v);
  shot.entities = {"hero"};
  CHECK_THROWS_AS(build_request(shot, Mode::ff2v, store, std::nullopt, true,
                                ModeParamsTable{}, 9, true),
                  MissingAnchor);
}

TEST_CASE("unconnected ff2v renders its first frame from the prompt") {
  backends::HashFeatureExtractor extractor(32);
  auto store = two_entity_store(extractor);
  auto shot = make_shot(3, Mode::ff2v);
  shot.entities = {"hero"};
  auto request = build_request(shot, Mode::ff2v, store, std::nullopt, false,
                               ModeParamsTable{}, 9, true);
  REQUIRE(request.first_frame_anchor.has_value());
  CHECK(request.first_frame_anchor->kind == FrameRef::Kind::rendered);
  CHECK(request.first_frame_anchor->prompt == "first");
}

TEST_CASE("flf2v requests always carry a goal frame") {
  backends::HashFeatureExtractor extractor(32);
  auto store = two_entity_store(extractor);

  SUBCASE("from last_frame_prompt when present") {
    auto shot = make_shot(1, Mode::flf2v);
    shot.entities = {"hero"};
    auto request = build_request(shot, Mode::flf2v, store, std::nullopt, false,
                                 ModeParamsTable{}, 9, true);
    REQUIRE(request.goal_frame.has_value());
    CHECK(request.goal_frame->prompt == "last");
  }
  SUBCASE("escalated shots fall back to the shot prompt") {
    auto shot = make_shot(1, Mode::ff2v);  // planner never promised a goal
    shot.entities = {"hero"};
    auto request = build_request(shot, Mode::flf2v, store, std::nullopt, false,
                                 ModeParamsTable{}, 9, true);
    REQUIRE(request.goal_frame.has_value());
    CHECK(request.goal_frame->prompt == shot.prompt);
  }
}

TEST_CASE("synthesize is deterministic under the mock backend") {
  backends::HashFeatureExtractor extractor(32);
  auto store = two_entity_store(extractor);
  backends::MockWorld world;
  world.seed = 11;
  backends::MockSynthesisBackend backend(world);

  auto shot = make_shot(1, Mode::t2v);
  shot.entities = {"hero", "sidekick"};
  auto request = build_request(shot, Mode::t2v, store, std::nullopt, false,
                               ModeParamsTable{}, 1234, true);

  auto a = synthesize(request, backend);
  auto b = synthesize(request, backend);
  CHECK(util::canonical(artifact_to_json(a)) ==
        util::canonical(artifact_to_json(b)));
  CHECK(a.seed == 1234);
  CHECK(a.mode_used == Mode::t2v);
  CHECK(a.frame_count() == 48);  // 3 s at 16 fps
}

TEST_CASE("vcc_check similarity extremes") {
  backends::HashFeatureExtractor extractor(4);

  gcm::EntityRecord rec;
  rec.entity_id = "hero";
  rec.appearance_vec = {1.0, 0.0, 0.0, 0.0};

  ShotArtifact artifact;
  artifact.shot_index = 1;
  artifact.duration_s = 1.0;

  SUBCASE("identical vectors score 1.0 and pass") {
    artifact.frame_meta.assign(
        4, {{"hero", backends::canonical_token(rec.appearance_vec)}});
    auto report = vcc_check(artifact, {rec}, extractor, 0.9);
    CHECK(report.per_entity_similarity.at("hero") == doctest::Approx(1.0));
    CHECK(report.pass);
  }
  SUBCASE("orthogonal vectors score 0.0 and fail") {
    artifact.frame_meta.assign(
        4, {{"hero", backends::canonical_token(
                         std::vector<double>{0.0, 1.0, 0.0, 0.0})}});
    auto report = vcc_check(artifact, {rec}, extractor, 0.5);
    CHECK(report.per_entity_similarity.at("hero") == 0.0);
    CHECK_FALSE(report.pass);
  }
  SUBCASE("entity missing from any frame counts as total drift") {
    artifact.frame_meta.assign(2, {});
    auto report = vcc_check(artifact, {rec}, extractor, 0.5);
    CHECK(report.per_entity_similarity.at("hero") == 0.0);
  }
  SUBCASE("theta is validated") {
    artifact.frame_meta.assign(1, {});
    CHECK_THROWS_AS(vcc_check(artifact, {rec}, extractor, 0.0),
                    PreconditionError);
  }
}

TEST_CASE("vcc_check flags unconditioned (random token) artifacts") {
  // Without memory conditioning every shot draws random tokens; across 50
  // seeds at least one entity must land below theta = 0.9 (a hash vector
  // nearly collinear with the stored one is astronomically unlikely).
  backends::HashFeatureExtractor extractor(64);
  gcm::MemoryStore store;
  store = gcm::register_entity(store, {"hero", "Hero", "red scarf"},
                               gcm::ArtifactRef{"p", "d"}, "portrait|hero",
                               extractor);
  const auto record = *gcm::retrieve(store, "hero");

  int failures = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    backends::MockWorld world;
    world.seed = seed;
    backends::MockSynthesisBackend backend(world);
    auto shot = make_shot(1, Mode::t2v);
    shot.entities = {"hero"};
    auto request = build_request(shot, Mode::t2v, store, std::nullopt, false,
                                 ModeParamsTable{}, seed, /*gcm_enabled=*/false);
    auto artifact = synthesize(request, backend);
    auto report = vcc_check(artifact, {record}, extractor, 0.9);
    if (!report.pass) ++failures;
  }
  CHECK(failures == 50);
}

TEST_CASE("request JSON round-trips") {
  backends::HashFeatureExtractor extractor(16);
  auto store = two_entity_store(extractor);
  auto shot = make_shot(2, Mode::flf2v);
  shot.entities = {"hero"};

  ShotArtifact prev;
  prev.shot_index = 1;
  prev.video_ref = "mock://video/prev";
  prev.duration_s = 1.0;
  prev.frame_meta.assign(16, {{"hero", "tok:aa"}});

  auto request = build_request(shot, Mode::flf2v, store, prev, true,
                               ModeParamsTable{}, 21, true);
  auto back = request_from_json(request_to_json(request));
  CHECK(util::canonical(request_to_json(back)) ==
        util::canonical(request_to_json(request)));
}
