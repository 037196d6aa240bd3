#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coagent/backends/mock.hpp"
#include "coagent/backends/scripted.hpp"
#include "coagent/verifier.hpp"

using namespace coagent;
using namespace coagent::verifier;
using backends::ScriptedVerdict;
using synthesis::Mode;

TEST_CASE("parse_verdict accepts the reviewer contract") {
  CHECK(parse_verdict("PASS").pass);
  CHECK(parse_verdict("  pass").pass);
  CHECK(parse_verdict("Pass.").pass);
  const auto fail = parse_verdict("FAIL: wrong hair color");
  CHECK_FALSE(fail.pass);
  CHECK(fail.reason == "wrong hair color");
  CHECK(parse_verdict("fail - too dark").reason == "too dark");
  CHECK(parse_verdict("FAIL").reason.empty());
  CHECK_THROWS_AS(parse_verdict("maybe"), VerdictParseError);
  CHECK_THROWS_AS(parse_verdict("The video looks fine"), VerdictParseError);
  CHECK_THROWS_AS(parse_verdict(""), VerdictParseError);
}

TEST_CASE("score_from_stages mapping arithmetic") {
  const Verdict pass{true, ""};
  const Verdict fail{false, "r"};
  std::map<std::string, Verdict> empty;
  CHECK(score_from_stages(pass, empty) == 1.0);
  CHECK(score_from_stages(fail, {{"a", pass}, {"b", pass}}) == 0.5);
  CHECK(score_from_stages(pass, {{"a", pass}, {"b", fail}}) == 0.75);

  // Exhaustive bounds over stage combinations and identity fractions.
  for (bool semantic_pass : {true, false}) {
    const Verdict semantic{semantic_pass, semantic_pass ? "" : "x"};
    for (int fails = 0; fails <= 2; ++fails) {
      std::map<std::string, Verdict> identity;
      identity["a"] = fails >= 1 ? fail : pass;
      identity["b"] = fails >= 2 ? fail : pass;
      const double score = score_from_stages(semantic, identity);
      CHECK(score >= 0.0);
      CHECK(score <= 1.0);
    }
  }
}

TEST_CASE("sample_frames policies") {
  FrameSampling kf4{FrameSampling::Policy::keyframes, 4};
  CHECK(sample_frames(48, kf4) == std::vector<int>{0, 15, 31, 47});
  CHECK(sample_frames(1, kf4) == std::vector<int>{0});
  CHECK(sample_frames(2, kf4) == std::vector<int>{0, 1});

  FrameSampling all{FrameSampling::Policy::all, 0};
  CHECK(sample_frames(3, all) == std::vector<int>{0, 1, 2});

  FrameSampling uni{FrameSampling::Policy::uniform, 4};
  const auto u = sample_frames(48, uni);
  CHECK(u == std::vector<int>{6, 18, 30, 42});

  // Property: sorted, unique, in range, for assorted sizes and ks.
  for (int n : {1, 2, 5, 16, 49}) {
    for (int k : {1, 2, 3, 8}) {
      for (auto policy : {FrameSampling::Policy::keyframes,
                          FrameSampling::Policy::uniform}) {
        const auto frames = sample_frames(n, FrameSampling{policy, k});
        REQUIRE(!frames.empty());
        for (std::size_t i = 0; i < frames.size(); ++i) {
          CHECK(frames[i] >= 0);
          CHECK(frames[i] < n);
          if (i > 0) CHECK(frames[i] > frames[i - 1]);
        }
      }
    }
  }
}

namespace {

struct LoopFixture {
  backends::HashFeatureExtractor extractor{32};
  gcm::MemoryStore store;
  storyboard::ShotSpec shot;
  backends::MockWorld world;
  backends::MockSynthesisBackend synth{backends::MockWorld{}};
  backends::MockPlannerClient planner;

  LoopFixture() {
    store = gcm::register_entity(
        store, {"hero", "Hero", "red scarf, silver jacket"},
        gcm::ArtifactRef{"portraits/hero.txt", "d"}, "portrait|hero",
        extractor);
    shot.index = 1;
    shot.prompt = "hero walks through a desert";
    shot.entities = {"hero"};
    shot.style = "warm";
    shot.duration_s = 1.0;
    shot.generation_mode = storyboard::GenerationMode::ff2v;
    shot.camera_angle = "wide";
    shot.lighting = "sun";
    shot.first_frame_prompt = "hero at dune";
  }

  synthesis::ShotArtifact first_artifact(Mode mode = Mode::t2v,
                                         std::uint64_t seed = 100) {
    auto request =
        synthesis::build_request(shot, mode, store, std::nullopt, false,
                                 synthesis::ModeParamsTable{}, seed, true);
    return synthesis::synthesize(request, synth);
  }

  RegenContext ctx(verifier::VerifierClient& client) {
    RegenContext c;
    c.synth = &synth;
    c.verifier = &client;
    c.planner = &planner;
    c.extractor = &extractor;
    c.sampling = FrameSampling{FrameSampling::Policy::all, 0};
    return c;
  }
};

}  // namespace

TEST_CASE("verify: consistent artifact scores 1.0 with no feedback") {
  LoopFixture fx;
  backends::MockVerifierClient client;
  auto report = verify(fx.first_artifact(), fx.shot, fx.store, client,
                       FrameSampling{FrameSampling::Policy::all, 0});
  CHECK(report.score == 1.0);
  CHECK(report.feedback.empty());
  CHECK(report.stage_semantic.pass);
  CHECK(report.stage_identity.at("hero").pass);
}

TEST_CASE("verify: identity token mismatch yields appearance feedback") {
  LoopFixture fx;
  auto artifact = fx.first_artifact();
  for (auto& frame : artifact.frame_meta) frame["hero"] = "rnd:0000beef";

  backends::MockVerifierClient client;
  auto report = verify(artifact, fx.shot, fx.store, client,
                       FrameSampling{FrameSampling::Policy::all, 0});
  CHECK(report.score == 0.5);
  CHECK_FALSE(report.stage_identity.at("hero").pass);
  REQUIRE(report.feedback.size() == 1);
  CHECK(report.feedback[0].kind == FeedbackKind::appearance_inconsistency);
  CHECK(report.feedback[0].offending_entities ==
        std::vector<std::string>{"hero"});
}

TEST_CASE("verify: dropped entity yields missing_entity feedback") {
  LoopFixture fx;
  auto artifact = fx.first_artifact();
  for (auto& frame : artifact.frame_meta) frame.erase("hero");

  backends::MockVerifierClient client;
  auto report = verify(artifact, fx.shot, fx.store, client,
                       FrameSampling{FrameSampling::Policy::all, 0});
  CHECK(report.score < 1.0);
  REQUIRE(!report.feedback.empty());
  CHECK(report.feedback[0].kind == FeedbackKind::missing_entity);
  CHECK(report.feedback[0].offending_entities ==
        std::vector<std::string>{"hero"});
}

TEST_CASE("verify: temporal keywords route to temporal_discontinuity") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client(
      {ScriptedVerdict{"FAIL: severe temporal flicker on the clock face", {}}});
  auto report = verify(fx.first_artifact(), fx.shot, fx.store, client,
                       FrameSampling{FrameSampling::Policy::all, 0});
  REQUIRE(!report.feedback.empty());
  CHECK(report.feedback[0].kind == FeedbackKind::temporal_discontinuity);
}

TEST_CASE("verify: unreducible reviewer text is a VerdictParseError") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client(
      {ScriptedVerdict{"The video looks fine", {}}});
  CHECK_THROWS_AS(verify(fx.first_artifact(), fx.shot, fx.store, client,
                         FrameSampling{FrameSampling::Policy::all, 0}),
                  VerdictParseError);
}

TEST_CASE("verify: vcc gate merges strictest-wins into identity") {
  LoopFixture fx;
  backends::MockVerifierClient client;
  synthesis::VccReport vcc;
  vcc.theta = 0.85;
  vcc.per_entity_similarity["hero"] = 0.2;
  vcc.pass = false;
  auto report = verify(fx.first_artifact(), fx.shot, fx.store, client,
                       FrameSampling{FrameSampling::Policy::all, 0}, vcc);
  CHECK(report.score == 0.5);
  CHECK_FALSE(report.stage_identity.at("hero").pass);
  REQUIRE(!report.feedback.empty());
  CHECK(report.feedback[0].kind == FeedbackKind::appearance_inconsistency);
}

TEST_CASE("verify: empty artifact is a precondition violation") {
  LoopFixture fx;
  backends::MockVerifierClient client;
  synthesis::ShotArtifact empty;
  CHECK_THROWS_AS(verify(empty, fx.shot, fx.store, client, FrameSampling{}),
                  PreconditionError);
}

TEST_CASE("regen_loop: appearance failure escalates, then converges") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client({
      ScriptedVerdict{"PASS", {{"hero", "FAIL: appearance drift"}}},
      ScriptedVerdict{"PASS", {}},
  });
  auto ctx = fx.ctx(client);
  auto [outcome, store] =
      regen_loop(fx.shot, fx.first_artifact(Mode::t2v, 100), fx.store, ctx,
                 0.9, 2, true);

  CHECK(outcome.attempts == 2);
  CHECK(outcome.converged);
  REQUIRE(outcome.attempt_log.size() == 2);
  CHECK(outcome.attempt_log[0].mode == Mode::t2v);
  CHECK(outcome.attempt_log[1].mode == Mode::ff2v);
  CHECK(outcome.attempt_log[0].seed == 100);
  CHECK(outcome.attempt_log[1].seed == 101);
  CHECK(outcome.accepted_attempt == 2);
  // Appearance-only failures never touch the prompt.
  CHECK(outcome.final_shot.prompt == fx.shot.prompt);
  // Memory was updated exactly once (clock advanced to this shot).
  CHECK(store.records.at("hero").last_update_step == fx.shot.index);
}

TEST_CASE("regen_loop: three semantic failures exhaust the budget") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client({
      ScriptedVerdict{"FAIL: wrong color", {}},
      ScriptedVerdict{"FAIL: wrong color", {}},
      ScriptedVerdict{"FAIL: wrong color", {}},
  });
  auto ctx = fx.ctx(client);
  const gcm::MemoryStore before = fx.store;
  auto [outcome, store] =
      regen_loop(fx.shot, fx.first_artifact(), fx.store, ctx, 0.9, 2, true);

  CHECK(outcome.attempts == 3);
  CHECK_FALSE(outcome.converged);
  CHECK(store == before);  // non-convergence leaves memory untouched
  // Semantic failures refine the prompt but never the mode.
  CHECK(outcome.attempt_log[0].mode == Mode::t2v);
  CHECK(outcome.attempt_log[1].mode == Mode::t2v);
  CHECK(outcome.attempt_log[2].mode == Mode::t2v);
  CHECK(outcome.final_shot.prompt != fx.shot.prompt);
  CHECK(outcome.final_shot.generation_mode == fx.shot.generation_mode);
  CHECK(outcome.final_shot.duration_s == fx.shot.duration_s);
}

TEST_CASE("regen_loop: immediate pass does not loop") {
  LoopFixture fx;
  backends::MockVerifierClient client;  // consistent world always passes
  auto ctx = fx.ctx(client);
  auto [outcome, store] =
      regen_loop(fx.shot, fx.first_artifact(), fx.store, ctx, 0.9, 2, true);
  CHECK(outcome.attempts == 1);
  CHECK(outcome.converged);
  CHECK(outcome.accepted_attempt == 1);
  CHECK(store.records.at("hero").last_update_step == 1);
  CHECK(store.step_counter == 1);
}

TEST_CASE("regen_loop: always-fail terminates at max_retries+1 attempts") {
  LoopFixture fx;
  for (int max_retries : {0, 1, 2, 4}) {
    CAPTURE(max_retries);
    backends::ScriptedVerifierClient client(std::vector<ScriptedVerdict>(
        16, ScriptedVerdict{"FAIL: never good enough", {}}));
    auto ctx = fx.ctx(client);
    auto [outcome, store] = regen_loop(fx.shot, fx.first_artifact(), fx.store,
                                       ctx, 0.9, max_retries, true);
    CHECK(outcome.attempts == max_retries + 1);
    CHECK_FALSE(outcome.converged);
  }
}

TEST_CASE("regen_loop: modes are monotone under any feedback sequence") {
  LoopFixture fx;
  std::uint64_t state = 99;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ScriptedVerdict> script;
    for (int i = 0; i < 6; ++i) {
      if (util::splitmix64(state) % 2) {
        script.push_back({"FAIL: wrong thing happens", {}});
      } else {
        script.push_back({"PASS", {{"hero", "FAIL: appearance drift"}}});
      }
    }
    backends::ScriptedVerifierClient client(script);
    auto ctx = fx.ctx(client);
    auto [outcome, store] =
        regen_loop(fx.shot, fx.first_artifact(), fx.store, ctx, 0.9, 4, true);
    for (std::size_t i = 1; i < outcome.attempt_log.size(); ++i) {
      CHECK(static_cast<int>(outcome.attempt_log[i].mode) >=
            static_cast<int>(outcome.attempt_log[i - 1].mode));
    }
  }
}

TEST_CASE("regen_loop: mixed feedback refines first, escalates later") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client({
      // Both kinds present: the semantic branch must win this iteration.
      ScriptedVerdict{"FAIL: wrong color", {{"hero", "FAIL: drift"}}},
      // Appearance only: now escalation fires.
      ScriptedVerdict{"PASS", {{"hero", "FAIL: drift"}}},
      ScriptedVerdict{"PASS", {}},
  });
  auto ctx = fx.ctx(client);
  auto [outcome, store] =
      regen_loop(fx.shot, fx.first_artifact(Mode::t2v, 50), fx.store, ctx, 0.9,
                 2, true);
  REQUIRE(outcome.attempts == 3);
  CHECK(outcome.attempt_log[0].mode == Mode::t2v);
  CHECK(outcome.attempt_log[1].mode == Mode::t2v);   // refined, not escalated
  CHECK(outcome.attempt_log[2].mode == Mode::ff2v);  // escalated second round
  CHECK(outcome.final_shot.prompt != fx.shot.prompt);
  CHECK(outcome.converged);
}

TEST_CASE("regen_loop: flf2v disabled saturates escalation at ff2v") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client({
      ScriptedVerdict{"PASS", {{"hero", "FAIL: drift"}}},
      ScriptedVerdict{"PASS", {{"hero", "FAIL: drift"}}},
      ScriptedVerdict{"PASS", {{"hero", "FAIL: drift"}}},
  });
  auto ctx = fx.ctx(client);
  auto [outcome, store] = regen_loop(
      fx.shot, fx.first_artifact(Mode::ff2v, 60), fx.store, ctx, 0.9, 2, false);
  CHECK(outcome.attempt_log[1].mode == Mode::ff2v);
  CHECK(outcome.attempt_log[2].mode == Mode::ff2v);
}

TEST_CASE("regen_loop: non-convergence keeps the best-scoring attempt") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client({
      // score 0.5 (semantic fail), then 0.75 (semantic pass, identity fail),
      // then 0.5 again: attempt 2 is the best.
      ScriptedVerdict{"FAIL: wrong color", {}},
      ScriptedVerdict{"PASS", {{"hero", "FAIL: drift"}}},
      ScriptedVerdict{"FAIL: wrong color again", {}},
  });
  auto ctx = fx.ctx(client);
  auto [outcome, store] =
      regen_loop(fx.shot, fx.first_artifact(), fx.store, ctx, 0.9, 2, true);
  CHECK_FALSE(outcome.converged);
  CHECK(outcome.accepted_attempt == 2);
  CHECK(outcome.final_report.score == 0.75);
}

TEST_CASE("regen_loop: temporal discontinuity routes to escalation") {
  LoopFixture fx;
  backends::ScriptedVerifierClient client({
      ScriptedVerdict{"FAIL: flickering illegible clock display", {}},
      ScriptedVerdict{"PASS", {}},
  });
  auto ctx = fx.ctx(client);
  auto [outcome, store] =
      regen_loop(fx.shot, fx.first_artifact(Mode::t2v, 70), fx.store, ctx, 0.9,
                 2, true);
  REQUIRE(outcome.attempts == 2);
  CHECK(outcome.attempt_log[0].feedback[0].kind ==
        FeedbackKind::temporal_discontinuity);
  CHECK(outcome.attempt_log[1].mode == Mode::ff2v);  // escalated, not refined
  CHECK(outcome.final_shot.prompt == fx.shot.prompt);
}

TEST_CASE("regen_loop: resumes from prior attempts without re-executing them") {
  LoopFixture fx;

  // Reference run: fails twice on appearance, passes on the third attempt.
  auto reference_script = [] {
    return std::vector<ScriptedVerdict>{
        ScriptedVerdict{"PASS", {{"hero", "FAIL: drift"}}},
        ScriptedVerdict{"PASS", {{"hero", "FAIL: drift"}}},
        ScriptedVerdict{"PASS", {}},
    };
  };
  backends::ScriptedVerifierClient full_client(reference_script());
  auto full_ctx = fx.ctx(full_client);
  std::vector<AttemptEvent> events;
  full_ctx.on_attempt = [&events](const AttemptEvent& e) {
    events.push_back(e);
  };
  auto [reference, ref_store] = regen_loop(
      fx.shot, fx.first_artifact(Mode::t2v, 80), fx.store, full_ctx, 0.9, 2,
      true);
  REQUIRE(reference.attempts == 3);

  // Resume after two journaled attempts: only the third may execute, and
  // its script entry is the only one consumed.
  std::vector<PriorAttempt> priors;
  for (int i = 0; i < 2; ++i) {
    priors.push_back(PriorAttempt{events[static_cast<std::size_t>(i)].shot,
                                  events[static_cast<std::size_t>(i)].artifact,
                                  events[static_cast<std::size_t>(i)].report});
  }
  backends::ScriptedVerifierClient tail_client({ScriptedVerdict{"PASS", {}}});
  auto resume_ctx = fx.ctx(tail_client);
  resume_ctx.priors = priors;
  int new_attempts = 0;
  resume_ctx.on_attempt = [&new_attempts](const AttemptEvent& e) {
    ++new_attempts;
    CHECK(e.attempt == 3);
  };
  auto [resumed, res_store] =
      regen_loop(fx.shot, std::nullopt, fx.store, resume_ctx, 0.9, 2, true);

  CHECK(new_attempts == 1);
  CHECK(resumed.attempts == 3);
  CHECK(resumed.converged == reference.converged);
  for (int i = 0; i < 3; ++i) {
    CHECK(resumed.attempt_log[static_cast<std::size_t>(i)].mode ==
          reference.attempt_log[static_cast<std::size_t>(i)].mode);
    CHECK(resumed.attempt_log[static_cast<std::size_t>(i)].seed ==
          reference.attempt_log[static_cast<std::size_t>(i)].seed);
  }
  CHECK(gcm::snapshot(res_store) == gcm::snapshot(ref_store));
}
