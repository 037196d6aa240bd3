#pragma once

#include <memory>

#include "coagent/backends/http.hpp"
#include "coagent/backends/mock.hpp"
#include "coagent/backends/scripted.hpp"
#include "coagent/config.hpp"
#include "coagent/pipeline.hpp"

namespace coagent::backends {

// Owns one run's backend clients and exposes them as pipeline deps.
struct Runtime {
  std::unique_ptr<storyboard::PlannerClient> planner;
  std::unique_ptr<verifier::VerifierClient> verifier;
  std::unique_ptr<synthesis::SynthesisBackend> synth;
  std::unique_ptr<gcm::FeatureExtractor> extractor;
  std::unique_ptr<ImageBackend> image;

  pipeline::Deps deps();
};

// Mock runtimes need no network and no secrets. The fault script, when
// present, overlays scripted verdicts over the mock reviewer.
Runtime make_runtime(const pipeline::RunConfig& config);

}  // namespace coagent::backends
