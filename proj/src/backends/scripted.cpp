#include "coagent/backends/scripted.hpp"

#include "coagent/util/hash.hpp"

namespace coagent::backends {

std::string ScriptedVerifierClient::check_semantic(
    const synthesis::ShotArtifact&, std::span<const int>,
    const storyboard::ShotSpec&) {
  if (script_.empty()) {
    current_ = ScriptedVerdict{};  // exhausted script passes through
    return "PASS";
  }
  current_ = script_.front();
  script_.pop_front();
  return current_->semantic;
}

std::string ScriptedVerifierClient::check_identity(
    const synthesis::ShotArtifact&, std::span<const int>,
    const gcm::EntityRecord& record) {
  if (!current_) return "PASS";
  auto it = current_->identity.find(record.entity_id);
  return it == current_->identity.end() ? "PASS" : it->second;
}

ScriptedOverlayVerifier::ScriptedOverlayVerifier(
    std::vector<FaultScriptEntry> script)
    : script_(std::move(script)) {}

const FaultScriptEntry* ScriptedOverlayVerifier::match(
    const std::string& stage, int shot, int attempt,
    const std::string& entity) const {
  for (const auto& entry : script_) {
    if (entry.stage != stage) continue;
    if (entry.shot != 0 && entry.shot != shot) continue;
    if (entry.attempt != 0 && entry.attempt != attempt) continue;
    if (stage == "identity" && !entry.entity.empty() && entry.entity != entity) {
      continue;
    }
    return &entry;
  }
  return nullptr;
}

std::string ScriptedOverlayVerifier::check_semantic(
    const synthesis::ShotArtifact& artifact, std::span<const int> frames,
    const storyboard::ShotSpec& shot) {
  // One semantic call per verification pass numbers the attempts.
  const int attempt = ++attempts_seen_[artifact.shot_index];
  current_attempt_[artifact.shot_index] = attempt;
  if (const auto* entry = match("semantic", artifact.shot_index, attempt, "")) {
    return entry->verdict;
  }
  return base_.check_semantic(artifact, frames, shot);
}

std::string ScriptedOverlayVerifier::check_identity(
    const synthesis::ShotArtifact& artifact, std::span<const int> frames,
    const gcm::EntityRecord& record) {
  const int attempt = current_attempt_[artifact.shot_index];
  if (const auto* entry =
          match("identity", artifact.shot_index, attempt, record.entity_id)) {
    return entry->verdict;
  }
  return base_.check_identity(artifact, frames, record);
}

StochasticVerifierClient::Outcome StochasticVerifierClient::outcome_for(
    int shot, int attempt, bool has_entities) const {
  std::uint64_t state = util::mix_seed(
      {seed_, static_cast<std::uint64_t>(shot),
       static_cast<std::uint64_t>(attempt)});
  const double pass_p = attempt == 1 ? p1_ : q_;
  Outcome out;
  out.pass = util::unit_double(util::splitmix64(state)) < pass_p;
  const bool coin = util::unit_double(util::splitmix64(state)) < 0.5;
  out.semantic_kind = coin || !has_entities;
  return out;
}

std::string StochasticVerifierClient::check_semantic(
    const synthesis::ShotArtifact& artifact, std::span<const int>,
    const storyboard::ShotSpec& shot) {
  const int attempt = ++attempts_seen_[artifact.shot_index];
  const Outcome out =
      outcome_for(artifact.shot_index, attempt, !shot.entities.empty());
  current_[artifact.shot_index] = out;
  if (out.pass || !out.semantic_kind) return "PASS";
  return "FAIL: sampled semantic mismatch";
}

std::string StochasticVerifierClient::check_identity(
    const synthesis::ShotArtifact& artifact, std::span<const int>,
    const gcm::EntityRecord& record) {
  auto it = current_.find(artifact.shot_index);
  if (it == current_.end() || it->second.pass || it->second.semantic_kind) {
    return "PASS";
  }
  return "FAIL: sampled appearance drift for " + record.entity_id;
}

std::optional<FaultAction> FaultPlan::next() {
  if (actions_.empty()) return std::nullopt;
  FaultAction out = actions_.front();
  actions_.pop_front();
  return out;
}

std::string FaultingPlannerClient::complete(const std::string& system_prompt,
                                            const std::string& user_message) {
  if (auto action = plan_.next()) {
    switch (action->behavior) {
      case FaultAction::Behavior::timeout:
        throw BackendError(BackendError::Kind::timeout,
                           "injected planner timeout");
      case FaultAction::Behavior::malformed:
        return "this is not the JSON you are looking for";
      case FaultAction::Behavior::verdict:
        return action->text;
    }
  }
  return inner_.complete(system_prompt, user_message);
}

synthesis::ShotArtifact FaultingSynthesisBackend::generate(
    const synthesis::SynthesisRequest& request) {
  if (auto action = plan_.next()) {
    switch (action->behavior) {
      case FaultAction::Behavior::timeout:
        throw GenerationTimeout("injected synthesis timeout");
      case FaultAction::Behavior::malformed:
        throw BackendError(BackendError::Kind::http_status,
                           "injected malformed synthesis response");
      case FaultAction::Behavior::verdict:
        break;  // verdict injections do not apply to synthesis
    }
  }
  return inner_.generate(request);
}

}  // namespace coagent::backends
