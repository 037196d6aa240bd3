#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coagent/gcm.hpp"
#include "coagent/storyboard.hpp"
#include "coagent/synthesis.hpp"
#include "coagent/verifier.hpp"

namespace coagent::backends {

// Deterministic symbolic world: videos are frame-indexed entity-token maps
// and every output is a pure function of (inputs, seed). Lets the whole
// closed loop run at desk scale.
struct MockWorld {
  std::uint64_t seed = 0;
  int token_space_bits = 32;  // random-token draw space
  double fps = 16.0;
};

// Canonical appearance token for a stored entity vector: "tok:" plus the
// hex-encoded int8 quantization of the vector. The encoding is decodable,
// so frame features reconstruct the vector it was derived from, and it is
// a fixed point of the memory blend: quantize(dequantize(q)) == q, hence
// tokens stay stable across any number of EMA updates.
std::string canonical_token(std::span<const double> vec);
std::optional<std::vector<double>> decode_token(std::string_view token);

// Deterministic semantic fingerprint of a shot's prompt and style.
std::string prompt_digest(const storyboard::ShotSpec& shot);

// Content-hash extractor: decodable "tok:" payloads dequantize exactly;
// anything else expands to a pseudo-random unit vector.
class HashFeatureExtractor final : public gcm::FeatureExtractor {
 public:
  explicit HashFeatureExtractor(int dim) : dim_(dim) {}

  std::vector<double> embed(std::string_view content) override;
  int dim() const override { return dim_; }

 private:
  int dim_ = 64;
};

class MockSynthesisBackend final : public synthesis::SynthesisBackend {
 public:
  explicit MockSynthesisBackend(MockWorld world) : world_(world) {}

  synthesis::ShotArtifact generate(
      const synthesis::SynthesisRequest& request) override;

 private:
  MockWorld world_;
};

// World-rule reviewer: semantic PASS iff every shot entity appears in the
// sampled frames and the artifact's prompt digest matches the shot;
// identity PASS iff the frame token equals the record's canonical token.
class MockVerifierClient final : public verifier::VerifierClient {
 public:
  std::string check_semantic(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const storyboard::ShotSpec& shot) override;
  std::string check_identity(const synthesis::ShotArtifact& artifact,
                             std::span<const int> frames,
                             const gcm::EntityRecord& record) override;
};

// Convenience wrapper running the standard two-stage verification against
// the mock reviewer rules.
verifier::VerificationReport mock_verify(const MockWorld& world,
                                         const synthesis::ShotArtifact& artifact,
                                         const storyboard::ShotSpec& shot,
                                         const gcm::MemoryStore& store);

// Image generation stand-in: writes deterministic symbolic portrait bytes.
class ImageBackend {
 public:
  virtual ~ImageBackend() = default;
  virtual gcm::ArtifactRef render_portrait(const std::string& prompt,
                                           const std::filesystem::path& run_dir,
                                           const std::string& rel_path) = 0;
};

class MockImageBackend final : public ImageBackend {
 public:
  gcm::ArtifactRef render_portrait(const std::string& prompt,
                                   const std::filesystem::path& run_dir,
                                   const std::string& rel_path) override;
};

// Planner stand-in. With a configured plan payload it replies verbatim;
// otherwise it derives a small schema-correct plan from the idea. Refine
// requests get a mechanical rewrite that appends the feedback detail.
class MockPlannerClient final : public storyboard::PlannerClient {
 public:
  MockPlannerClient() = default;
  explicit MockPlannerClient(std::string plan_payload)
      : plan_payload_(std::move(plan_payload)) {}

  // Scripted responses (consumed first, in order) for transcript tests.
  void push_response(std::string response);

  std::string complete(const std::string& system_prompt,
                       const std::string& user_message) override;

  int calls() const { return calls_; }
  const std::vector<std::string>& received_users() const { return users_; }

 private:
  std::string default_plan(const std::string& user_message) const;
  std::string mechanical_refine(const std::string& user_message) const;

  std::string plan_payload_;
  std::vector<std::string> scripted_;
  std::vector<std::string> users_;
  int calls_ = 0;
};

}  // namespace coagent::backends
