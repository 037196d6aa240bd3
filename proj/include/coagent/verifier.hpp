#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coagent/feedback.hpp"
#include "coagent/gcm.hpp"
#include "coagent/storyboard.hpp"
#include "coagent/synthesis.hpp"

namespace coagent::verifier {

struct Verdict {
  bool pass = false;
  std::string reason;  // FAIL explanation, empty on PASS

  bool operator==(const Verdict&) const = default;
};

std::string verdict_to_string(const Verdict& v);

struct VerificationReport {
  double score = 0.0;
  std::vector<Feedback> feedback;  // empty <=> pass
  Verdict stage_semantic;
  std::map<std::string, Verdict> stage_identity;

  bool passed() const { return feedback.empty(); }
};

util::Json report_to_json(const VerificationReport& report);
VerificationReport report_from_json(const util::Json& j);

struct FrameSampling {
  enum class Policy { keyframes, uniform, all };
  Policy policy = Policy::keyframes;
  int k = 4;
};

// Two-stage reviewer backend. Returned text must reduce to PASS/FAIL via
// parse_verdict. Stage-2 checks may run concurrently per entity.
class VerifierClient {
 public:
  virtual ~VerifierClient() = default;
  virtual std::string check_semantic(const synthesis::ShotArtifact& artifact,
                                     std::span<const int> frames,
                                     const storyboard::ShotSpec& shot) = 0;
  virtual std::string check_identity(const synthesis::ShotArtifact& artifact,
                                     std::span<const int> frames,
                                     const gcm::EntityRecord& record) = 0;
};

// Case-insensitive leading PASS/FAIL token; FAIL captures the trailing
// reason. Anything else is a VerdictParseError.
Verdict parse_verdict(std::string_view text);

// score = w_s*[semantic pass] + w_id*(identity pass fraction).
// An empty identity map counts as fraction 1.
double score_from_stages(const Verdict& semantic,
                         const std::map<std::string, Verdict>& identity,
                         double w_semantic = 0.5, double w_identity = 0.5);

// Deterministic sparse sampling. keyframes(k): first, last and k-2 evenly
// spaced interior frames.
std::vector<int> sample_frames(int frame_count, const FrameSampling& policy);

// Runs the semantic stage against the shot prompt and the identity stage
// per entity against the stored records. When a VCC report is supplied its
// per-entity verdicts are merged in strictest-wins fashion.
VerificationReport verify(const synthesis::ShotArtifact& artifact,
                          const storyboard::ShotSpec& shot,
                          const gcm::MemoryStore& store, VerifierClient& vlm,
                          const FrameSampling& sampling,
                          const std::optional<synthesis::VccReport>& vcc = {});

struct AttemptRecord {
  int attempt = 0;
  synthesis::Mode mode = synthesis::Mode::t2v;
  std::uint64_t seed = 0;
  double score = 0.0;
  std::vector<Feedback> feedback;
};

struct RegenOutcome {
  synthesis::ShotArtifact final_artifact;
  int attempts = 0;
  bool converged = false;
  std::vector<AttemptRecord> attempt_log;
  storyboard::ShotSpec final_shot;     // after any semantic refinement
  VerificationReport final_report;     // report of the accepted attempt
  int accepted_attempt = 0;            // 1-based index into attempt_log
};

// Emitted once per verified attempt so the pipeline can persist state
// before the loop advances.
struct AttemptEvent {
  int attempt = 0;
  storyboard::ShotSpec shot;
  std::optional<synthesis::SynthesisRequest> request;  // absent for attempt 1
  synthesis::ShotArtifact artifact;
  VerificationReport report;
  std::optional<synthesis::VccReport> vcc;
};

// A previously journaled attempt, replayed into the loop on resume.
struct PriorAttempt {
  storyboard::ShotSpec shot;
  synthesis::ShotArtifact artifact;
  VerificationReport report;
};

struct RegenContext {
  synthesis::SynthesisBackend* synth = nullptr;
  VerifierClient* verifier = nullptr;
  storyboard::PlannerClient* planner = nullptr;
  gcm::FeatureExtractor* extractor = nullptr;
  synthesis::ModeParamsTable params;
  FrameSampling sampling;
  std::optional<synthesis::ShotArtifact> prev_artifact;
  bool prev_connected = false;
  bool gcm_enabled = true;
  double vcc_theta = 0.85;
  double alpha = 0.3;
  std::function<void(const AttemptEvent&)> on_attempt;
  std::vector<PriorAttempt> priors;
};

// Verifier-guided regeneration: while the score is below tau, semantic
// feedback refines the shot, appearance feedback escalates the mode, then
// the shot is re-synthesized with a fresh seed and re-verified. Bounded by
// max_retries extra attempts. The store is updated only on convergence.
std::pair<RegenOutcome, gcm::MemoryStore> regen_loop(
    const storyboard::ShotSpec& shot,
    const std::optional<synthesis::ShotArtifact>& first_artifact,
    gcm::MemoryStore store, RegenContext& ctx, double tau, int max_retries,
    bool flf2v_enabled);

// Appearance content per entity from the artifact's final frame, used for
// memory updates.
std::map<std::string, std::string> entity_content_from(
    const synthesis::ShotArtifact& artifact);

}  // namespace coagent::verifier
