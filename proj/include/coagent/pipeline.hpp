#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coagent/backends/mock.hpp"
#include "coagent/config.hpp"
#include "coagent/gcm.hpp"
#include "coagent/journal.hpp"
#include "coagent/pacing.hpp"
#include "coagent/storyboard.hpp"
#include "coagent/synthesis.hpp"
#include "coagent/verifier.hpp"

namespace coagent::pipeline {

class PlanPhaseError : public Error {
 public:
  using Error::Error;
};

class ShotPhaseError : public Error {
 public:
  ShotPhaseError(int shot, const std::string& message)
      : Error("shot " + std::to_string(shot) + ": " + message), shot_(shot) {}
  int shot() const { return shot_; }

 private:
  int shot_;
};

class EditPhaseError : public Error {
 public:
  using Error::Error;
};

struct Hooks {
  // Called after a shot's shot_done record is durable; used by crash drills.
  std::function<void(int)> after_shot;
};

struct Deps {
  storyboard::PlannerClient* planner = nullptr;
  verifier::VerifierClient* verifier = nullptr;
  synthesis::SynthesisBackend* synth = nullptr;
  gcm::FeatureExtractor* extractor = nullptr;
  backends::ImageBackend* image = nullptr;
  gcm::LookupMeter* meter = nullptr;  // optional conditioning-lookup counter
  Hooks hooks;
};

struct ShotSummary {
  int shot_index = 0;
  synthesis::Mode mode_used = synthesis::Mode::t2v;
  int attempts = 0;
  double score = 0.0;
  bool converged = false;
  bool identity_consistent = true;
};

struct RunStats {
  double first_pass_rate = 0.0;
  std::optional<double> mean_extra_turns;  // absent when no shot retried
  double convergence_rate = 0.0;
};

// first_pass = fraction with attempts == 1; mean extra turns averages
// (attempts - 1) over shots that retried; convergence = fraction converged.
RunStats compute_stats(const std::vector<std::pair<int, bool>>& shots);
RunStats compute_stats(const std::vector<ShotSummary>& shots);

struct RunManifest {
  std::string run_id;
  std::string plan_digest;
  std::vector<ShotSummary> per_shot;
  std::string timeline_ref;
  RunStats stats;
  bool degraded = false;

  util::Json to_json() const;
  static RunManifest from_json(const util::Json& j);
};

enum class Phase { planning, shooting, editing, done, failed };

std::string to_string(Phase phase);

// Derived view of a run directory, reconstructed purely from the journal.
struct RunState {
  std::string run_id;
  RunConfig config;
  storyboard::Idea idea;
  Phase phase = Phase::planning;
  bool plan_ready = false;
  bool characters_registered = false;
  bool edit_done = false;
  int shots_total = 0;

  struct ShotOutcome {
    int shot_index = 0;
    int attempts = 0;
    bool converged = false;
    int accepted_attempt = 1;
    double score = 0.0;
    synthesis::Mode mode = synthesis::Mode::t2v;
    bool identity_consistent = true;
  };
  std::vector<ShotOutcome> done_shots;
  int next_shot = 1;
  int partial_attempts = 0;  // attempts already journaled for next_shot
};

RunState reconstruct_state(const std::filesystem::path& run_dir);

// Executes the whole closed loop: plan, register portraits, per-shot mode
// selection + synthesis + verifier-guided regeneration, pacing edit,
// manifest. Every transition is journaled (fsync) before the next step.
RunManifest run(const storyboard::Idea& idea, const RunConfig& config,
                Deps& deps, const std::filesystem::path& run_dir);

// Continues from the first incomplete step of an interrupted run.
// Completed attempts are never re-executed. Resuming a finished run
// returns the existing manifest without side effects.
RunManifest resume(const std::filesystem::path& run_dir, Deps& deps);

struct ReplayResult {
  bool match = false;
  int shot = 0;
  int attempts = 0;
  std::string detail;
};

// Re-executes one shot's regeneration loop from journaled inputs with
// deterministic backends and checks the journaled attempts reproduce.
ReplayResult replay_shot(const std::filesystem::path& run_dir, int shot_index,
                         Deps& deps);

}  // namespace coagent::pipeline
