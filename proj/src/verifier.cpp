#include "coagent/verifier.hpp"

#include <algorithm>
#include <cctype>

namespace coagent::verifier {

using util::Json;

std::string verdict_to_string(const Verdict& v) {
  if (v.pass) return "PASS";
  return v.reason.empty() ? "FAIL" : "FAIL: " + v.reason;
}

Json report_to_json(const VerificationReport& report) {
  Json j;
  Json fb = Json::array();
  for (const auto& f : report.feedback) {
    fb.push_back(Json{{"detail", f.detail},
                      {"kind", to_string(f.kind)},
                      {"offending_entities", f.offending_entities}});
  }
  j["feedback"] = fb;
  j["score"] = report.score;
  Json identity = Json::object();
  for (const auto& [id, v] : report.stage_identity) {
    identity[id] = verdict_to_string(v);
  }
  j["stage_identity"] = identity;
  j["stage_semantic"] = verdict_to_string(report.stage_semantic);
  return j;
}

VerificationReport report_from_json(const Json& j) {
  VerificationReport r;
  r.score = j.at("score").get<double>();
  for (const auto& f : j.at("feedback")) {
    Feedback fb;
    fb.kind = feedback_kind_from_string(f.at("kind").get<std::string>());
    fb.detail = f.at("detail").get<std::string>();
    fb.offending_entities =
        f.at("offending_entities").get<std::vector<std::string>>();
    r.feedback.push_back(std::move(fb));
  }
  r.stage_semantic = parse_verdict(j.at("stage_semantic").get<std::string>());
  for (const auto& item : j.at("stage_identity").items()) {
    r.stage_identity[item.key()] =
        parse_verdict(item.value().get<std::string>());
  }
  return r;
}

Verdict parse_verdict(std::string_view text) {
  std::size_t begin = 0;
  while (begin < text.size() &&
         std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  std::size_t end = begin;
  while (end < text.size() &&
         std::isalpha(static_cast<unsigned char>(text[end]))) {
    ++end;
  }
  std::string token(text.substr(begin, end - begin));
  std::transform(token.begin(), token.end(), token.begin(),
                 [](unsigned char c) { return std::tolower(c); });

  if (token == "pass") return Verdict{true, ""};
  if (token == "fail") {
    std::size_t r = end;
    while (r < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[r])) ||
            text[r] == ':' || text[r] == '-' || text[r] == ',')) {
      ++r;
    }
    std::string reason(text.substr(r));
    while (!reason.empty() &&
           std::isspace(static_cast<unsigned char>(reason.back()))) {
      reason.pop_back();
    }
    return Verdict{false, reason};
  }
  throw VerdictParseError("response is not reducible to PASS/FAIL: \"" +
                          std::string(text.substr(0, 80)) + "\"");
}

double score_from_stages(const Verdict& semantic,
                         const std::map<std::string, Verdict>& identity,
                         double w_semantic, double w_identity) {
  double identity_fraction = 1.0;
  if (!identity.empty()) {
    int passes = 0;
    for (const auto& [id, v] : identity) {
      if (v.pass) ++passes;
    }
    identity_fraction =
        static_cast<double>(passes) / static_cast<double>(identity.size());
  }
  return w_semantic * (semantic.pass ? 1.0 : 0.0) +
         w_identity * identity_fraction;
}

std::vector<int> sample_frames(int frame_count, const FrameSampling& policy) {
  std::vector<int> out;
  if (frame_count <= 0) return out;

  auto push_unique = [&out](int idx) {
    if (out.empty() || out.back() != idx) out.push_back(idx);
  };

  switch (policy.policy) {
    case FrameSampling::Policy::all:
      for (int i = 0; i < frame_count; ++i) out.push_back(i);
      break;
    case FrameSampling::Policy::keyframes: {
      const int k = std::max(1, policy.k);
      if (k == 1 || frame_count == 1) {
        out.push_back(0);
        break;
      }
      for (int j = 0; j < k; ++j) {
        push_unique(static_cast<int>(
            (static_cast<long long>(j) * (frame_count - 1)) / (k - 1)));
      }
      break;
    }
    case FrameSampling::Policy::uniform: {
      const int k = std::max(1, policy.k);
      for (int j = 0; j < k; ++j) {
        push_unique(static_cast<int>((2LL * j + 1) * frame_count / (2LL * k)));
      }
      break;
    }
  }
  return out;
}

namespace {

bool contains_ci(const std::string& haystack, const std::string& needle) {
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                        needle.end(), [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it != haystack.end();
}

// Routes a stage-1 FAIL reason onto a feedback kind. Identity failures are
// always appearance_inconsistency; this table only disambiguates stage 1.
FeedbackKind classify_semantic_reason(const std::string& reason) {
  if (contains_ci(reason, "missing")) return FeedbackKind::missing_entity;
  if (contains_ci(reason, "flicker") || contains_ci(reason, "temporal") ||
      contains_ci(reason, "discontinu")) {
    return FeedbackKind::temporal_discontinuity;
  }
  return FeedbackKind::semantic_mismatch;
}

}  // namespace

VerificationReport verify(const synthesis::ShotArtifact& artifact,
                          const storyboard::ShotSpec& shot,
                          const gcm::MemoryStore& store, VerifierClient& vlm,
                          const FrameSampling& sampling,
                          const std::optional<synthesis::VccReport>& vcc) {
  if (artifact.frame_meta.empty()) {
    throw PreconditionError("cannot verify an artifact without frame metadata");
  }
  const std::vector<int> frames = sample_frames(artifact.frame_count(), sampling);
  if (frames.empty()) {
    throw PreconditionError("frame sampling selected no frames");
  }

  VerificationReport report;
  report.stage_semantic =
      parse_verdict(vlm.check_semantic(artifact, frames, shot));

  for (const auto& id : shot.entities) {
    auto record = gcm::retrieve(store, id);
    if (!record) {
      report.stage_identity[id] = Verdict{false, "entity not registered"};
      continue;
    }
    report.stage_identity[id] =
        parse_verdict(vlm.check_identity(artifact, frames, *record));
  }

  // Similarity gate feeds the identity stage, strictest verdict wins.
  if (vcc) {
    for (const auto& [id, sim] : vcc->per_entity_similarity) {
      if (sim < vcc->theta) {
        auto it = report.stage_identity.find(id);
        if (it == report.stage_identity.end() || it->second.pass) {
          report.stage_identity[id] =
              Verdict{false, "appearance similarity below gate threshold"};
        }
      }
    }
  }

  report.score = score_from_stages(report.stage_semantic, report.stage_identity);

  if (!report.stage_semantic.pass) {
    Feedback fb;
    fb.kind = classify_semantic_reason(report.stage_semantic.reason);
    fb.detail = report.stage_semantic.reason.empty()
                    ? "semantic check failed"
                    : report.stage_semantic.reason;
    if (fb.kind == FeedbackKind::missing_entity) {
      for (const auto& id : shot.entities) {
        if (contains_ci(report.stage_semantic.reason, id)) {
          fb.offending_entities.push_back(id);
        }
      }
    }
    report.feedback.push_back(std::move(fb));
  }

  std::vector<std::string> drifted;
  std::string drift_detail;
  for (const auto& id : shot.entities) {
    auto it = report.stage_identity.find(id);
    if (it != report.stage_identity.end() && !it->second.pass) {
      drifted.push_back(id);
      if (drift_detail.empty()) {
        drift_detail = it->second.reason.empty() ? "identity check failed"
                                                 : it->second.reason;
      }
    }
  }
  if (!drifted.empty()) {
    Feedback fb;
    fb.kind = FeedbackKind::appearance_inconsistency;
    fb.detail = drift_detail;
    fb.offending_entities = std::move(drifted);
    report.feedback.push_back(std::move(fb));
  }

  return report;
}

std::map<std::string, std::string> entity_content_from(
    const synthesis::ShotArtifact& artifact) {
  if (artifact.frame_meta.empty()) return {};
  return artifact.frame_meta.back();
}

namespace {

// Picks the one corrective action for this iteration. Semantic refinement
// wins when both kinds are present; escalation happens on a later failing
// iteration.
enum class Action { refine, escalate, none };

Action pick_action(const std::vector<Feedback>& feedback) {
  bool semantic = false;
  bool appearance = false;
  for (const auto& fb : feedback) {
    if (is_semantic(fb.kind)) semantic = true;
    if (is_appearance(fb.kind)) appearance = true;
  }
  if (semantic) return Action::refine;
  if (appearance) return Action::escalate;
  return Action::none;
}

const Feedback* first_semantic(const std::vector<Feedback>& feedback) {
  for (const auto& fb : feedback) {
    if (is_semantic(fb.kind)) return &fb;
  }
  return nullptr;
}

}  // namespace

std::pair<RegenOutcome, gcm::MemoryStore> regen_loop(
    const storyboard::ShotSpec& shot,
    const std::optional<synthesis::ShotArtifact>& first_artifact,
    gcm::MemoryStore store, RegenContext& ctx, double tau, int max_retries,
    bool flf2v_enabled) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw PreconditionError("tau must lie in (0,1]");
  }
  if (max_retries < 0) {
    throw PreconditionError("max_retries must be >= 0");
  }
  if (!first_artifact && ctx.priors.empty()) {
    throw PreconditionError(
        "regen_loop needs a first artifact or prior attempts");
  }

  RegenOutcome outcome;
  storyboard::ShotSpec current_shot = shot;

  struct Attempt {
    storyboard::ShotSpec shot;
    synthesis::ShotArtifact artifact;
    VerificationReport report;
  };
  std::vector<Attempt> attempts;

  auto run_vcc = [&](const synthesis::ShotArtifact& a)
      -> std::optional<synthesis::VccReport> {
    if (!ctx.gcm_enabled || !ctx.extractor || current_shot.entities.empty()) {
      return std::nullopt;
    }
    std::vector<gcm::EntityRecord> records;
    for (const auto& id : current_shot.entities) {
      if (auto rec = gcm::retrieve(store, id)) records.push_back(*rec);
    }
    if (records.empty()) return std::nullopt;
    return synthesis::vcc_check(a, records, *ctx.extractor, ctx.vcc_theta);
  };

  auto log_attempt = [&](Attempt att) {
    AttemptRecord rec;
    rec.attempt = static_cast<int>(attempts.size()) + 1;
    rec.mode = att.artifact.mode_used;
    rec.seed = att.artifact.seed;
    rec.score = att.report.score;
    rec.feedback = att.report.feedback;
    outcome.attempt_log.push_back(std::move(rec));
    attempts.push_back(std::move(att));
  };

  if (!ctx.priors.empty()) {
    // Resume path: completed attempts are replayed, never re-executed.
    for (const auto& prior : ctx.priors) {
      log_attempt(Attempt{prior.shot, prior.artifact, prior.report});
    }
    current_shot = ctx.priors.back().shot;
  } else {
    auto vcc = run_vcc(*first_artifact);
    VerificationReport report = verify(*first_artifact, current_shot, store,
                                       *ctx.verifier, ctx.sampling, vcc);
    log_attempt(Attempt{current_shot, *first_artifact, report});
    if (ctx.on_attempt) {
      ctx.on_attempt(AttemptEvent{1, current_shot, std::nullopt,
                                  *first_artifact, report, vcc});
    }
  }

  const int max_attempts = max_retries + 1;
  synthesis::Mode mode = attempts.back().artifact.mode_used;
  std::uint64_t seed = attempts.back().artifact.seed;

  while (attempts.back().report.score < tau &&
         static_cast<int>(attempts.size()) < max_attempts) {
    switch (pick_action(attempts.back().report.feedback)) {
      case Action::refine: {
        const Feedback* fb = first_semantic(attempts.back().report.feedback);
        current_shot =
            storyboard::refine_semantic(current_shot, *fb, *ctx.planner);
        break;
      }
      case Action::escalate:
        mode = synthesis::escalate_mode(mode, flf2v_enabled);
        break;
      case Action::none:
        break;
    }

    seed += 1;  // fresh, deterministic seed per regeneration attempt
    synthesis::SynthesisRequest request = synthesis::build_request(
        current_shot, mode, store, ctx.prev_artifact, ctx.prev_connected,
        ctx.params, seed, ctx.gcm_enabled);
    synthesis::ShotArtifact artifact = synthesize(request, *ctx.synth);
    auto vcc = run_vcc(artifact);
    VerificationReport report =
        verify(artifact, current_shot, store, *ctx.verifier, ctx.sampling, vcc);
    log_attempt(Attempt{current_shot, artifact, report});
    if (ctx.on_attempt) {
      ctx.on_attempt(AttemptEvent{static_cast<int>(attempts.size()),
                                  current_shot, request, artifact, report,
                                  vcc});
    }
  }

  outcome.attempts = static_cast<int>(attempts.size());
  outcome.converged = attempts.back().report.score >= tau;

  int accepted = outcome.attempts - 1;
  if (!outcome.converged) {
    // Keep the best-scoring attempt (earliest on ties); the run is marked
    // degraded rather than aborted.
    accepted = 0;
    for (int i = 1; i < outcome.attempts; ++i) {
      if (attempts[static_cast<std::size_t>(i)].report.score >
          attempts[static_cast<std::size_t>(accepted)].report.score) {
        accepted = i;
      }
    }
  }
  const Attempt& chosen = attempts[static_cast<std::size_t>(accepted)];
  outcome.accepted_attempt = accepted + 1;
  outcome.final_artifact = chosen.artifact;
  outcome.final_report = chosen.report;
  outcome.final_shot = chosen.shot;

  if (outcome.converged && ctx.gcm_enabled && ctx.extractor) {
    store = gcm::update_from_shot(store, chosen.artifact.shot_index,
                                  entity_content_from(chosen.artifact),
                                  *ctx.extractor, ctx.alpha);
  }

  return {std::move(outcome), std::move(store)};
}

}  // namespace coagent::verifier
