#include "coagent/pipeline.hpp"

#include <algorithm>
#include <set>

#include "coagent/prompts.hpp"
#include "coagent/util/hash.hpp"
#include "coagent/util/ids.hpp"

namespace coagent::pipeline {

using util::Json;

namespace {

std::string shot_dir(int shot) { return "shots/" + std::to_string(shot); }

std::string attempt_dir(int shot, int attempt) {
  return shot_dir(shot) + "/attempt_" + std::to_string(attempt);
}

std::string gcm_step_path(int step) {
  return "gcm/step_" + std::to_string(step) + ".json";
}

Json idea_to_json(const storyboard::Idea& idea) {
  Json j;
  j["concept"] = idea.concept_text;
  j["language"] = idea.language_tag;
  if (idea.pacing_template_id) j["pacing_template"] = *idea.pacing_template_id;
  if (idea.style_ref) j["style_ref"] = *idea.style_ref;
  return j;
}

storyboard::Idea idea_from_json(const Json& j) {
  storyboard::Idea idea;
  idea.concept_text = j.at("concept").get<std::string>();
  idea.language_tag = j.value("language", std::string("en"));
  if (j.contains("pacing_template")) {
    idea.pacing_template_id = j.at("pacing_template").get<std::string>();
  }
  if (j.contains("style_ref")) {
    idea.style_ref = j.at("style_ref").get<std::string>();
  }
  return idea;
}

std::vector<std::string> feedback_kinds(const std::vector<Feedback>& fb) {
  std::vector<std::string> kinds;
  for (const auto& f : fb) kinds.push_back(to_string(f.kind));
  return kinds;
}

bool identity_all_pass(const verifier::VerificationReport& report) {
  return std::all_of(report.stage_identity.begin(), report.stage_identity.end(),
                     [](const auto& kv) { return kv.second.pass; });
}

// Drives one run directory through its phases; shared by run and resume.
class RunDriver {
 public:
  RunDriver(const storyboard::Idea& idea, RunConfig config, Deps& deps,
            const std::filesystem::path& run_dir)
      : idea_(idea),
        config_(std::move(config)),
        deps_(deps),
        run_dir_(run_dir),
        lock_(run_dir),
        journal_(run_dir) {
    run_id_ = util::derive_run_id(
        util::mix_seed({config_.seed, util::fnv1a64(idea_.concept_text)}),
        util::fnv1a64(util::canonical(config_.to_json())));
  }

  // Fresh run entry point.
  RunManifest execute() {
    Json started;
    started["config"] = config_.to_json();
    started["idea"] = idea_to_json(idea_);
    started["run_id"] = run_id_;
    journal_.append("run_started", std::move(started));

    phase_plan();
    phase_register();
    for (int i = 1; i <= static_cast<int>(plan_.shots.size()); ++i) {
      shoot(i, {});
    }
    return phase_edit();
  }

  // Resume entry point; state holds what the journal already proves.
  RunManifest execute_from(const RunState& state) {
    journal_.append("run_resumed", Json{{"run_id", run_id_}});

    if (!state.plan_ready) {
      phase_plan();
      phase_register();
    } else {
      plan_ = storyboard::parse_plan_json(
          util::read_file(run_dir_ / "plan.json"));
      if (!state.characters_registered) {
        phase_register();
      } else {
        const int last_step = static_cast<int>(state.done_shots.size());
        store_ = gcm::restore(
            util::read_file(run_dir_ / gcm_step_path(last_step)));
      }
    }

    for (const auto& outcome : state.done_shots) {
      adopt_done_shot(outcome);
    }
    const int first_pending = static_cast<int>(state.done_shots.size()) + 1;
    for (int i = first_pending; i <= static_cast<int>(plan_.shots.size()); ++i) {
      std::vector<verifier::PriorAttempt> priors;
      if (i == state.next_shot && state.partial_attempts > 0) {
        priors = load_priors(i, state.partial_attempts);
      }
      shoot(i, std::move(priors));
    }
    return phase_edit();
  }

 private:
  void phase_plan() {
    try {
      storyboard::PlanOptions options;
      options.shot_cap = config_.shot_cap;
      plan_ = storyboard::plan(idea_, *deps_.planner, options);
      const std::string bytes = storyboard::serialize_plan(plan_);
      util::atomic_write_file(run_dir_ / "plan.json", bytes);
      Json record;
      record["plan_digest"] = util::content_digest(bytes);
      record["shots"] = static_cast<int>(plan_.shots.size());
      journal_.append("plan_ready", std::move(record));
    } catch (const Error& e) {
      journal_.append("phase_failed",
                      Json{{"error", e.what()}, {"phase", "planning"}});
      throw PlanPhaseError(e.what());
    }
  }

  void phase_register() {
    try {
      store_ = gcm::MemoryStore{};
      for (const auto& decl : plan_.characters) {
        const std::string prompt = prompts::render_portrait(
            decl.name + ": " + decl.static_features, plan_.style);
        const std::string rel = "portraits/" + decl.id + ".txt";
        gcm::ArtifactRef ref =
            deps_.image->render_portrait(prompt, run_dir_, rel);
        const std::string content = util::read_file(run_dir_ / ref.uri);
        store_ = gcm::register_entity(store_, decl, ref, content,
                                      *deps_.extractor);
      }
      const std::string snapshot = gcm::snapshot(store_);
      util::atomic_write_file(run_dir_ / gcm_step_path(0), snapshot);
      Json record;
      record["count"] = static_cast<int>(plan_.characters.size());
      record["gcm_digest"] = util::content_digest(snapshot);
      record["snapshot"] = gcm_step_path(0);
      journal_.append("characters_registered", std::move(record));
    } catch (const Error& e) {
      journal_.append("phase_failed",
                      Json{{"error", e.what()}, {"phase", "registering"}});
      throw PlanPhaseError(e.what());
    }
  }

  // Loads a completed shot's accepted artifact/spec so later shots anchor
  // correctly after a resume.
  void adopt_done_shot(const RunState::ShotOutcome& outcome) {
    const std::string base = attempt_dir(outcome.shot_index,
                                         outcome.accepted_attempt);
    auto artifact = synthesis::artifact_from_json(util::must_parse(
        util::read_file(run_dir_ / (base + "/artifact.json")), "artifact"));
    auto request = synthesis::request_from_json(util::must_parse(
        util::read_file(run_dir_ / (base + "/request.json")), "request"));

    ShotSummary summary;
    summary.shot_index = outcome.shot_index;
    summary.mode_used = outcome.mode;
    summary.attempts = outcome.attempts;
    summary.score = outcome.score;
    summary.converged = outcome.converged;
    summary.identity_consistent = outcome.identity_consistent;
    summaries_.push_back(summary);
    final_artifacts_.push_back(artifact);

    prev_artifact_ = std::move(artifact);
    prev_shot_spec_ = request.shot;
    prev_score_ = outcome.score;
  }

  std::vector<verifier::PriorAttempt> load_priors(int shot, int count) {
    std::vector<verifier::PriorAttempt> priors;
    for (int a = 1; a <= count; ++a) {
      const std::string base = attempt_dir(shot, a);
      verifier::PriorAttempt prior;
      prior.artifact = synthesis::artifact_from_json(util::must_parse(
          util::read_file(run_dir_ / (base + "/artifact.json")), "artifact"));
      prior.report = verifier::report_from_json(util::must_parse(
          util::read_file(run_dir_ / (base + "/verify.json")), "verify"));
      prior.shot =
          synthesis::request_from_json(
              util::must_parse(
                  util::read_file(run_dir_ / (base + "/request.json")),
                  "request"))
              .shot;
      priors.push_back(std::move(prior));
    }
    return priors;
  }

  void persist_attempt(int shot, const verifier::AttemptEvent& event) {
    const std::string base = attempt_dir(shot, event.attempt);
    if (event.request) {
      util::atomic_write_file(
          run_dir_ / (base + "/request.json"),
          util::canonical(synthesis::request_to_json(*event.request)));
    }
    util::atomic_write_file(
        run_dir_ / (base + "/artifact.json"),
        util::canonical(synthesis::artifact_to_json(event.artifact)));
    util::atomic_write_file(
        run_dir_ / (base + "/verify.json"),
        util::canonical(verifier::report_to_json(event.report)));
    if (event.vcc) {
      util::atomic_write_file(
          run_dir_ / (base + "/vcc.json"),
          util::canonical(synthesis::vcc_to_json(*event.vcc)));
    }

    Json record;
    record["attempt"] = event.attempt;
    record["converged"] = event.report.score >= config_.tau;
    record["feedback"] = feedback_kinds(event.report.feedback);
    record["mode"] = storyboard::to_string(event.artifact.mode_used);
    record["score"] = event.report.score;
    record["seed"] = event.artifact.seed;
    record["shot"] = shot;
    journal_.append("attempt_done", std::move(record));
  }

  void shoot(int i, std::vector<verifier::PriorAttempt> priors) {
    try {
      const storyboard::ShotSpec& shot =
          plan_.shots[static_cast<std::size_t>(i - 1)];

      std::optional<synthesis::ShotArtifact> first_artifact;
      if (priors.empty()) {
        journal_.append("shot_started", Json{{"shot", i}});

        double overlap = 0.0;
        if (prev_shot_spec_) {
          overlap = gcm::entity_overlap(
              {prev_shot_spec_->entities.begin(), prev_shot_spec_->entities.end()},
              {shot.entities.begin(), shot.entities.end()});
        }
        const synthesis::Mode mode = synthesis::select_mode(
            prev_score_, config_.tau, overlap, shot, config_.flf2v_enabled,
            config_.delta_margin);

        const std::uint64_t seed =
            util::mix_seed({config_.seed, static_cast<std::uint64_t>(i)});
        synthesis::SynthesisRequest request = synthesis::build_request(
            shot, mode, store_, prev_artifact_, prev_connected(),
            config_.mode_params, seed, config_.gcm_enabled, deps_.meter);
        util::atomic_write_file(
            run_dir_ / (attempt_dir(i, 1) + "/request.json"),
            util::canonical(synthesis::request_to_json(request)));
        first_artifact = synthesis::synthesize(request, *deps_.synth);
      }

      verifier::RegenContext ctx;
      ctx.synth = deps_.synth;
      ctx.verifier = deps_.verifier;
      ctx.planner = deps_.planner;
      ctx.extractor = deps_.extractor;
      ctx.params = config_.mode_params;
      ctx.sampling = config_.sampling;
      ctx.prev_artifact = prev_artifact_;
      ctx.prev_connected = prev_connected();
      ctx.gcm_enabled = config_.gcm_enabled;
      ctx.vcc_theta = config_.vcc_theta;
      ctx.alpha = config_.alpha;
      ctx.priors = std::move(priors);
      ctx.on_attempt = [this, i](const verifier::AttemptEvent& event) {
        persist_attempt(i, event);
      };

      auto [outcome, next_store] = verifier::regen_loop(
          shot, first_artifact, store_, ctx, config_.tau, config_.max_retries,
          config_.flf2v_enabled);
      store_ = std::move(next_store);

      const std::string snapshot = gcm::snapshot(store_);
      util::atomic_write_file(run_dir_ / gcm_step_path(i), snapshot);

      ShotSummary summary;
      summary.shot_index = i;
      summary.mode_used = outcome.final_artifact.mode_used;
      summary.attempts = outcome.attempts;
      summary.score = outcome.final_report.score;
      summary.converged = outcome.converged;
      summary.identity_consistent = identity_all_pass(outcome.final_report);
      summaries_.push_back(summary);
      final_artifacts_.push_back(outcome.final_artifact);

      Json record;
      record["accepted_attempt"] = outcome.accepted_attempt;
      record["attempts"] = outcome.attempts;
      record["converged"] = outcome.converged;
      record["gcm_snapshot"] = gcm_step_path(i);
      record["identity_consistent"] = summary.identity_consistent;
      record["mode"] = storyboard::to_string(summary.mode_used);
      record["score"] = summary.score;
      record["shot"] = i;
      journal_.append("shot_done", std::move(record));

      prev_artifact_ = outcome.final_artifact;
      prev_shot_spec_ = outcome.final_shot;
      prev_score_ = summary.score;

      if (deps_.hooks.after_shot) deps_.hooks.after_shot(i);
    } catch (const Error& e) {
      journal_.append("phase_failed",
                      Json{{"error", e.what()},
                           {"phase", "shooting"},
                           {"shot", i}});
      throw ShotPhaseError(i, e.what());
    }
  }

  RunManifest phase_edit() {
    try {
      pacing::PacingTemplate tmpl =
          pacing::builtin_template(config_.pacing_template_id);
      pacing::Timeline timeline = pacing::edit(final_artifacts_, tmpl);
      const std::string timeline_bytes =
          util::canonical(pacing::timeline_to_json(timeline));
      util::atomic_write_file(run_dir_ / "timeline.json", timeline_bytes);
      util::atomic_write_file(run_dir_ / "timeline.edl",
                              pacing::to_edl(timeline));
      Json edit_record;
      edit_record["edl"] = "timeline.edl";
      edit_record["timeline"] = "timeline.json";
      edit_record["total_duration_s"] = timeline.total_duration_s;
      journal_.append("edit_done", std::move(edit_record));

      RunManifest manifest = build_manifest();
      const std::string manifest_bytes = util::canonical(manifest.to_json());
      util::atomic_write_file(run_dir_ / "manifest.json", manifest_bytes);
      Json done;
      done["degraded"] = manifest.degraded;
      done["manifest"] = "manifest.json";
      done["manifest_digest"] = util::content_digest(manifest_bytes);
      journal_.append("run_done", std::move(done));
      return manifest;
    } catch (const Error& e) {
      journal_.append("phase_failed",
                      Json{{"error", e.what()}, {"phase", "editing"}});
      throw EditPhaseError(e.what());
    }
  }

  RunManifest build_manifest() const {
    RunManifest manifest;
    manifest.run_id = run_id_;
    manifest.plan_digest =
        util::content_digest(util::read_file(run_dir_ / "plan.json"));
    manifest.per_shot = summaries_;
    manifest.timeline_ref = "timeline.json";
    manifest.stats = compute_stats(summaries_);
    manifest.degraded =
        std::any_of(summaries_.begin(), summaries_.end(),
                    [](const ShotSummary& s) { return !s.converged; });
    return manifest;
  }

  bool prev_connected() const {
    return prev_shot_spec_ && prev_shot_spec_->connect_to_next;
  }

  storyboard::Idea idea_;
  RunConfig config_;
  Deps& deps_;
  std::filesystem::path run_dir_;
  util::DirLock lock_;
  Journal journal_;
  std::string run_id_;

  storyboard::StoryboardPlan plan_;
  gcm::MemoryStore store_;
  std::optional<synthesis::ShotArtifact> prev_artifact_;
  std::optional<storyboard::ShotSpec> prev_shot_spec_;
  std::optional<double> prev_score_;
  std::vector<ShotSummary> summaries_;
  std::vector<synthesis::ShotArtifact> final_artifacts_;
};

}  // namespace

RunStats compute_stats(const std::vector<std::pair<int, bool>>& shots) {
  RunStats stats;
  if (shots.empty()) {
    throw PreconditionError("compute_stats needs at least one shot");
  }
  const double n = static_cast<double>(shots.size());
  int first_pass = 0;
  int converged = 0;
  int retried = 0;
  int extra = 0;
  for (const auto& [attempts, ok] : shots) {
    if (attempts == 1) ++first_pass;
    if (ok) ++converged;
    if (attempts > 1) {
      ++retried;
      extra += attempts - 1;
    }
  }
  stats.first_pass_rate = first_pass / n;
  stats.convergence_rate = converged / n;
  if (retried > 0) {
    stats.mean_extra_turns = static_cast<double>(extra) / retried;
  }
  return stats;
}

RunStats compute_stats(const std::vector<ShotSummary>& shots) {
  std::vector<std::pair<int, bool>> pairs;
  pairs.reserve(shots.size());
  for (const auto& s : shots) pairs.emplace_back(s.attempts, s.converged);
  return compute_stats(pairs);
}

Json RunManifest::to_json() const {
  Json j;
  j["degraded"] = degraded;
  Json shots = Json::array();
  for (const auto& s : per_shot) {
    shots.push_back(Json{{"attempts", s.attempts},
                         {"converged", s.converged},
                         {"identity_consistent", s.identity_consistent},
                         {"mode_used", storyboard::to_string(s.mode_used)},
                         {"score", s.score},
                         {"shot_index", s.shot_index}});
  }
  j["per_shot"] = shots;
  j["plan_digest"] = plan_digest;
  j["run_id"] = run_id;
  Json stats;
  stats["convergence_rate"] = this->stats.convergence_rate;
  stats["first_pass_rate"] = this->stats.first_pass_rate;
  if (this->stats.mean_extra_turns) {
    stats["mean_extra_turns"] = *this->stats.mean_extra_turns;
  }
  j["stats"] = stats;
  j["timeline_ref"] = timeline_ref;
  return j;
}

RunManifest RunManifest::from_json(const Json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.plan_digest = j.at("plan_digest").get<std::string>();
  m.timeline_ref = j.at("timeline_ref").get<std::string>();
  m.degraded = j.at("degraded").get<bool>();
  for (const auto& s : j.at("per_shot")) {
    ShotSummary summary;
    summary.shot_index = s.at("shot_index").get<int>();
    summary.mode_used =
        storyboard::mode_from_string(s.at("mode_used").get<std::string>());
    summary.attempts = s.at("attempts").get<int>();
    summary.score = s.at("score").get<double>();
    summary.converged = s.at("converged").get<bool>();
    summary.identity_consistent = s.at("identity_consistent").get<bool>();
    m.per_shot.push_back(summary);
  }
  const Json& stats = j.at("stats");
  m.stats.first_pass_rate = stats.at("first_pass_rate").get<double>();
  m.stats.convergence_rate = stats.at("convergence_rate").get<double>();
  if (stats.contains("mean_extra_turns")) {
    m.stats.mean_extra_turns = stats.at("mean_extra_turns").get<double>();
  }
  return m;
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::planning:
      return "planning";
    case Phase::shooting:
      return "shooting";
    case Phase::editing:
      return "editing";
    case Phase::done:
      return "done";
    case Phase::failed:
      return "failed";
  }
  return "planning";
}

RunState reconstruct_state(const std::filesystem::path& run_dir) {
  const auto entries = Journal::read_all(run_dir);
  if (entries.empty()) {
    throw Error("no journal found in " + run_dir.string());
  }
  if (entries.front().type != "run_started") {
    throw JournalCorrupt(entries.front().byte_offset,
                         "journal does not begin with run_started");
  }

  RunState state;
  state.config = RunConfig::from_json(entries.front().record.at("config"));
  state.idea = idea_from_json(entries.front().record.at("idea"));
  state.run_id = entries.front().record.at("run_id").get<std::string>();

  bool run_done = false;
  int current_shot = 0;
  for (const auto& entry : entries) {
    const Json& r = entry.record;
    if (entry.type == "plan_ready") {
      state.plan_ready = true;
      state.shots_total = r.at("shots").get<int>();
    } else if (entry.type == "characters_registered") {
      state.characters_registered = true;
    } else if (entry.type == "shot_started") {
      current_shot = r.at("shot").get<int>();
      state.partial_attempts = 0;
    } else if (entry.type == "attempt_done") {
      if (r.at("shot").get<int>() == current_shot) {
        state.partial_attempts = r.at("attempt").get<int>();
      }
    } else if (entry.type == "shot_done") {
      RunState::ShotOutcome outcome;
      outcome.shot_index = r.at("shot").get<int>();
      outcome.attempts = r.at("attempts").get<int>();
      outcome.converged = r.at("converged").get<bool>();
      outcome.accepted_attempt = r.at("accepted_attempt").get<int>();
      outcome.score = r.at("score").get<double>();
      outcome.mode = storyboard::mode_from_string(r.at("mode").get<std::string>());
      outcome.identity_consistent = r.at("identity_consistent").get<bool>();
      state.done_shots.push_back(outcome);
      current_shot = 0;
      state.partial_attempts = 0;
    } else if (entry.type == "edit_done") {
      state.edit_done = true;
    } else if (entry.type == "run_done") {
      run_done = true;
    }
  }

  state.next_shot = static_cast<int>(state.done_shots.size()) + 1;
  if (run_done) {
    state.phase = Phase::done;
  } else if (!state.plan_ready || !state.characters_registered) {
    state.phase = Phase::planning;
  } else if (state.next_shot <= state.shots_total) {
    state.phase = Phase::shooting;
  } else {
    state.phase = Phase::editing;
  }
  return state;
}

RunManifest run(const storyboard::Idea& idea, const RunConfig& config,
                Deps& deps, const std::filesystem::path& run_dir) {
  if (std::filesystem::exists(run_dir) &&
      !std::filesystem::is_empty(run_dir)) {
    throw Error("run directory is not empty: " + run_dir.string() +
                " (use resume)");
  }
  RunDriver driver(idea, config, deps, run_dir);
  return driver.execute();
}

RunManifest resume(const std::filesystem::path& run_dir, Deps& deps) {
  RunState state = reconstruct_state(run_dir);
  if (state.phase == Phase::done) {
    return RunManifest::from_json(util::must_parse(
        util::read_file(run_dir / "manifest.json"), "manifest"));
  }
  RunDriver driver(state.idea, state.config, deps, run_dir);
  return driver.execute_from(state);
}

ReplayResult replay_shot(const std::filesystem::path& run_dir, int shot_index,
                         Deps& deps) {
  RunState state = reconstruct_state(run_dir);
  const auto& done = state.done_shots;
  auto it = std::find_if(done.begin(), done.end(),
                         [&](const RunState::ShotOutcome& o) {
                           return o.shot_index == shot_index;
                         });
  if (it == done.end()) {
    throw Error("shot " + std::to_string(shot_index) +
                " has no completed outcome to replay");
  }
  const RunConfig& config = state.config;

  storyboard::StoryboardPlan plan =
      storyboard::parse_plan_json(util::read_file(run_dir / "plan.json"));
  const storyboard::ShotSpec& shot =
      plan.shots[static_cast<std::size_t>(shot_index - 1)];

  gcm::MemoryStore store = gcm::restore(
      util::read_file(run_dir / gcm_step_path(shot_index - 1)));

  std::optional<synthesis::ShotArtifact> prev_artifact;
  std::optional<storyboard::ShotSpec> prev_spec;
  std::optional<double> prev_score;
  if (shot_index > 1) {
    const auto& prev_outcome = done[static_cast<std::size_t>(shot_index - 2)];
    const std::string base =
        attempt_dir(shot_index - 1, prev_outcome.accepted_attempt);
    prev_artifact = synthesis::artifact_from_json(util::must_parse(
        util::read_file(run_dir / (base + "/artifact.json")), "artifact"));
    prev_spec = synthesis::request_from_json(
                    util::must_parse(
                        util::read_file(run_dir / (base + "/request.json")),
                        "request"))
                    .shot;
    prev_score = prev_outcome.score;
  }

  double overlap = 0.0;
  if (prev_spec) {
    overlap = gcm::entity_overlap(
        {prev_spec->entities.begin(), prev_spec->entities.end()},
        {shot.entities.begin(), shot.entities.end()});
  }
  const synthesis::Mode mode =
      synthesis::select_mode(prev_score, config.tau, overlap, shot,
                             config.flf2v_enabled, config.delta_margin);
  const std::uint64_t seed =
      util::mix_seed({config.seed, static_cast<std::uint64_t>(shot_index)});
  const bool prev_connected = prev_spec && prev_spec->connect_to_next;

  synthesis::SynthesisRequest request = synthesis::build_request(
      shot, mode, store, prev_artifact, prev_connected, config.mode_params,
      seed, config.gcm_enabled);
  synthesis::ShotArtifact first = synthesis::synthesize(request, *deps.synth);

  std::vector<verifier::AttemptEvent> events;
  verifier::RegenContext ctx;
  ctx.synth = deps.synth;
  ctx.verifier = deps.verifier;
  ctx.planner = deps.planner;
  ctx.extractor = deps.extractor;
  ctx.params = config.mode_params;
  ctx.sampling = config.sampling;
  ctx.prev_artifact = prev_artifact;
  ctx.prev_connected = prev_connected;
  ctx.gcm_enabled = config.gcm_enabled;
  ctx.vcc_theta = config.vcc_theta;
  ctx.alpha = config.alpha;
  ctx.on_attempt = [&events](const verifier::AttemptEvent& event) {
    events.push_back(event);
  };

  auto [outcome, ignored_store] = verifier::regen_loop(
      shot, first, store, ctx, config.tau, config.max_retries,
      config.flf2v_enabled);

  ReplayResult result;
  result.shot = shot_index;
  result.attempts = outcome.attempts;
  if (outcome.attempts != it->attempts) {
    result.detail = "attempt count differs: replay " +
                    std::to_string(outcome.attempts) + " vs journal " +
                    std::to_string(it->attempts);
    return result;
  }
  for (const auto& event : events) {
    const std::string base = attempt_dir(shot_index, event.attempt);
    const std::string journaled =
        util::read_file(run_dir / (base + "/verify.json"));
    const std::string replayed =
        util::canonical(verifier::report_to_json(event.report));
    if (journaled != replayed) {
      result.detail = "verify.json differs at attempt " +
                      std::to_string(event.attempt);
      return result;
    }
    const std::string journaled_artifact =
        util::read_file(run_dir / (base + "/artifact.json"));
    const std::string replayed_artifact =
        util::canonical(synthesis::artifact_to_json(event.artifact));
    if (journaled_artifact != replayed_artifact) {
      result.detail = "artifact.json differs at attempt " +
                      std::to_string(event.attempt);
      return result;
    }
  }
  result.match = true;
  result.detail = "replay reproduced the journaled attempts";
  return result;
}

}  // namespace coagent::pipeline
