#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coagent/backends/mock.hpp"
#include "coagent/verifier.hpp"

namespace coagent::backends {

// Transcript verifier for unit tests: one entry per verification pass.
struct ScriptedVerdict {
  std::string semantic = "PASS";
  std::map<std::string, std::string> identity;  // entity -> verdict; others PASS
};

class ScriptedVerifierClient final : public verifier::VerifierClient {
 public:
  explicit ScriptedVerifierClient(std::vector<ScriptedVerdict> script)
      : script_(script.begin(), script.end()) {}

  std::string check_semantic(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const storyboard::ShotSpec& shot) override;
  std::string check_identity(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const gcm::EntityRecord& record) override;

 private:
  std::deque<ScriptedVerdict> script_;
  std::optional<ScriptedVerdict> current_;
};

// One scripted override of the mock reviewer, keyed by (shot, attempt).
// shot/attempt of 0 act as wildcards. Stage is "semantic" or "identity";
// identity overrides may target a specific entity.
struct FaultScriptEntry {
  int shot = 0;
  int attempt = 0;
  std::string stage = "semantic";
  std::string verdict = "FAIL: scripted failure";
  std::string entity;  // identity stage only; empty matches all entities

  bool operator==(const FaultScriptEntry&) const = default;
};

// Mock reviewer with deterministic scripted overrides. Attempt numbers are
// tracked per shot by counting semantic calls, so runs replay exactly from
// the journaled configuration.
class ScriptedOverlayVerifier final : public verifier::VerifierClient {
 public:
  ScriptedOverlayVerifier(std::vector<FaultScriptEntry> script);

  std::string check_semantic(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const storyboard::ShotSpec& shot) override;
  std::string check_identity(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const gcm::EntityRecord& record) override;

 private:
  const FaultScriptEntry* match(const std::string& stage, int shot,
                                int attempt, const std::string& entity) const;

  std::vector<FaultScriptEntry> script_;
  MockVerifierClient base_;
  std::map<int, int> attempts_seen_;  // shot -> semantic calls so far
  std::map<int, int> current_attempt_;
};

// PASS with probability p1 on a shot's first attempt and q on each retry;
// deterministic per (seed, shot, attempt). Failures alternate between
// semantic and appearance kinds via an independent coin.
class StochasticVerifierClient final : public verifier::VerifierClient {
 public:
  StochasticVerifierClient(double p1, double q, std::uint64_t seed)
      : p1_(p1), q_(q), seed_(seed) {}

  // Shots are replayed across trials; reset clears the attempt counters.
  void reset() { attempts_seen_.clear(); }

  std::string check_semantic(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const storyboard::ShotSpec& shot) override;
  std::string check_identity(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const gcm::EntityRecord& record) override;

 private:
  struct Outcome {
    bool pass = true;
    bool semantic_kind = true;
  };
  Outcome outcome_for(int shot, int attempt, bool has_entities) const;

  double p1_;
  double q_;
  std::uint64_t seed_;
  std::map<int, int> attempts_seen_;
  std::map<int, Outcome> current_;
};

// Ordered fault plan for backend adapters: consumed entry by entry, then
// pass-through.
struct FaultAction {
  enum class Behavior { timeout, malformed, verdict };
  Behavior behavior = Behavior::timeout;
  std::string text;  // verdict payload
};

class FaultPlan {
 public:
  explicit FaultPlan(std::vector<FaultAction> actions)
      : actions_(actions.begin(), actions.end()) {}

  std::optional<FaultAction> next();

 private:
  std::deque<FaultAction> actions_;
};

class FaultingPlannerClient final : public storyboard::PlannerClient {
 public:
  FaultingPlannerClient(storyboard::PlannerClient& inner, FaultPlan plan)
      : inner_(inner), plan_(std::move(plan)) {}

  std::string complete(const std::string& system_prompt,
                       const std::string& user_message) override;

 private:
  storyboard::PlannerClient& inner_;
  FaultPlan plan_;
};

class FaultingSynthesisBackend final : public synthesis::SynthesisBackend {
 public:
  FaultingSynthesisBackend(synthesis::SynthesisBackend& inner, FaultPlan plan)
      : inner_(inner), plan_(std::move(plan)) {}

  synthesis::ShotArtifact generate(
      const synthesis::SynthesisRequest& request) override;

 private:
  synthesis::SynthesisBackend& inner_;
  FaultPlan plan_;
};

}  // namespace coagent::backends
