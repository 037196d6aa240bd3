#pragma once

#include <string>
#include <vector>

#include "coagent/backends/endpoint.hpp"
#include "coagent/backends/mock.hpp"
#include "coagent/storyboard.hpp"
#include "coagent/synthesis.hpp"
#include "coagent/verifier.hpp"

namespace coagent::backends {

// Chat-completion style POST: system + user message, bearer-token auth,
// first choice's message content returned. One transparent retry on
// transport failures.
std::string chat_complete(const BackendEndpoint& endpoint,
                          const std::string& system,
                          const std::vector<ChatPart>& user_parts);

// Video endpoint POST carrying the synthesis wire schema; the response
// supplies video_uri, frames and duration.
synthesis::ShotArtifact generate_video(const BackendEndpoint& endpoint,
                                       const synthesis::SynthesisRequest& request);

// Wire form of a synthesis request (shared by client and schema tests).
util::Json synthesis_request_wire(const synthesis::SynthesisRequest& request);
util::Json chat_request_wire(const std::string& system,
                             const std::vector<ChatPart>& user_parts);

class HttpPlannerClient final : public storyboard::PlannerClient {
 public:
  explicit HttpPlannerClient(BackendEndpoint endpoint)
      : endpoint_(std::move(endpoint)) {}

  std::string complete(const std::string& system_prompt,
                       const std::string& user_message) override;

 private:
  BackendEndpoint endpoint_;
};

class HttpVerifierClient final : public verifier::VerifierClient {
 public:
  explicit HttpVerifierClient(BackendEndpoint endpoint)
      : endpoint_(std::move(endpoint)) {}

  std::string check_semantic(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const storyboard::ShotSpec& shot) override;

  // Stage 2 audits every sampled frame against the master portrait;
  // the first FAIL wins.
  std::string check_identity(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const gcm::EntityRecord& record) override;

 private:
  BackendEndpoint endpoint_;
};

class HttpSynthesisBackend final : public synthesis::SynthesisBackend {
 public:
  explicit HttpSynthesisBackend(BackendEndpoint endpoint)
      : endpoint_(std::move(endpoint)) {}

  synthesis::ShotArtifact generate(
      const synthesis::SynthesisRequest& request) override;

 private:
  BackendEndpoint endpoint_;
};

class HttpImageBackend final : public ImageBackend {
 public:
  explicit HttpImageBackend(BackendEndpoint endpoint)
      : endpoint_(std::move(endpoint)) {}

  gcm::ArtifactRef render_portrait(const std::string& prompt,
                                   const std::filesystem::path& run_dir,
                                   const std::string& rel_path) override;

 private:
  BackendEndpoint endpoint_;
};

}  // namespace coagent::backends
