#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coagent/gcm.hpp"
#include "coagent/storyboard.hpp"
#include "coagent/util/json.hpp"

namespace coagent::synthesis {

// Runtime synthesis mode; same vocabulary as the planner's declared mode.
using Mode = storyboard::GenerationMode;

struct ModeParams {
  int width = 0;
  int height = 0;
  int steps = 0;
  std::string checkpoint_id;

  bool operator==(const ModeParams&) const = default;
};

struct ModeParamsTable {
  ModeParams t2v{832, 480, 40, "Wan2.1-T2V-14B"};
  ModeParams ff2v{832, 480, 30, "Wan2.1-I2V-14B-480P"};
  ModeParams flf2v{1280, 720, 30, "Wan2.1-FLF2V-14B-720P"};

  const ModeParams& for_mode(Mode mode) const;

  bool operator==(const ModeParamsTable&) const = default;
};

// A frame handle: either a concrete frame of an earlier artifact or an
// image to be rendered from a prompt by the backend.
struct FrameRef {
  enum class Kind { artifact_frame, rendered };

  Kind kind = Kind::rendered;
  std::string video_ref;                        // artifact_frame
  int frame_index = -1;                         // artifact_frame
  std::string prompt;                           // rendered
  std::map<std::string, std::string> tokens;    // symbolic content when known

  bool operator==(const FrameRef&) const = default;
};

// One generated shot. In symbolic mode frame_meta carries per-frame
// entity appearance tokens; real backends may return embedding refs here.
struct ShotArtifact {
  int shot_index = 0;
  Mode mode_used = Mode::t2v;
  std::uint64_t seed = 0;
  std::string video_ref;
  std::vector<std::map<std::string, std::string>> frame_meta;
  double duration_s = 0.0;
  std::string prompt_digest;  // symbolic-mode semantic fingerprint

  int frame_count() const { return static_cast<int>(frame_meta.size()); }

  bool operator==(const ShotArtifact&) const = default;
};

struct SynthesisRequest {
  storyboard::ShotSpec shot;
  Mode mode = Mode::t2v;
  std::vector<gcm::EntityRecord> entity_records;
  std::optional<FrameRef> first_frame_anchor;
  std::optional<FrameRef> goal_frame;
  ModeParams backend_params;
  std::uint64_t seed = 0;
};

// Identity-similarity gate comparing stored entity vectors against
// generated-frame features.
struct VccReport {
  std::map<std::string, double> per_entity_similarity;
  bool pass = true;
  double theta = 0.0;
};

// Deterministic mode policy. Ordered rules:
//   1. first shot (or no previous score) -> t2v
//   2. zero entity overlap -> t2v (isolated shot)
//   3. planner-declared flf2v honored whenever flf2v is enabled
//   4. |prev_score - tau| <= delta -> ff2v (margin band)
//   5. prev_score < tau - delta -> flf2v if enabled, else ff2v
//   6. otherwise (healthy previous shot, connected) -> ff2v
Mode select_mode(std::optional<double> prev_score, double tau, double overlap,
                 const storyboard::ShotSpec& shot, bool flf2v_enabled,
                 double delta = 0.05);

// t2v -> ff2v -> flf2v, saturating; flf2v disabled saturates at ff2v.
Mode escalate_mode(Mode mode, bool flf2v_enabled);

ShotArtifact artifact_from_json(const util::Json& j);
util::Json artifact_to_json(const ShotArtifact& artifact);
util::Json request_to_json(const SynthesisRequest& request);
SynthesisRequest request_from_json(const util::Json& j);
util::Json frame_ref_to_json(const FrameRef& ref);
FrameRef frame_ref_from_json(const util::Json& j);
util::Json vcc_to_json(const VccReport& report);

SynthesisRequest build_request(const storyboard::ShotSpec& shot, Mode mode,
                               const gcm::MemoryStore& store,
                               const std::optional<ShotArtifact>& prev,
                               bool prev_connected,
                               const ModeParamsTable& params,
                               std::uint64_t seed, bool gcm_enabled,
                               gcm::LookupMeter* meter = nullptr);

class SynthesisBackend {
 public:
  virtual ~SynthesisBackend() = default;
  virtual ShotArtifact generate(const SynthesisRequest& request) = 0;
};

ShotArtifact synthesize(const SynthesisRequest& request,
                        SynthesisBackend& backend);

// Per-entity min-over-frames cosine similarity (clamped to [0,1]) between
// the stored vector and the frame features reconstructed by the extractor.
VccReport vcc_check(const ShotArtifact& artifact,
                    const std::vector<gcm::EntityRecord>& records,
                    gcm::FeatureExtractor& extractor, double theta);

}  // namespace coagent::synthesis
