#include "coagent/backends/mock.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coagent/prompts.hpp"
#include "coagent/util/fs.hpp"
#include "coagent/util/hash.hpp"

namespace coagent::backends {

using util::Json;

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::string normalized_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::string canonical_token(std::span<const double> vec) {
  std::string out = "tok:";
  out.reserve(4 + vec.size() * 2);
  for (double v : vec) {
    double clamped = std::max(-1.0, std::min(1.0, v));
    int q = static_cast<int>(std::lround(clamped * 127.0));
    auto byte = static_cast<unsigned>(q & 0xFF);
    out.push_back(kHexDigits[(byte >> 4) & 0xF]);
    out.push_back(kHexDigits[byte & 0xF]);
  }
  return out;
}

std::optional<std::vector<double>> decode_token(std::string_view token) {
  if (token.rfind("tok:", 0) != 0) return std::nullopt;
  const std::string_view hex = token.substr(4);
  if (hex.empty() || hex.size() % 2 != 0) return std::nullopt;
  std::vector<double> vec;
  vec.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_value(hex[i]);
    const int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    auto byte = static_cast<std::int8_t>((hi << 4) | lo);
    vec.push_back(static_cast<double>(byte) / 127.0);
  }
  return vec;
}

std::string prompt_digest(const storyboard::ShotSpec& shot) {
  return util::content_digest(normalized_text(shot.prompt) + "|" +
                              normalized_text(shot.style));
}

std::vector<double> HashFeatureExtractor::embed(std::string_view content) {
  if (auto decoded = decode_token(content)) {
    if (static_cast<int>(decoded->size()) == dim_) return *decoded;
    // Token of foreign dimension: fall through to the hash path.
  }
  std::uint64_t state = util::fnv1a64(content);
  std::vector<double> vec(static_cast<std::size_t>(dim_));
  double norm_sq = 0.0;
  for (double& v : vec) {
    v = 2.0 * util::unit_double(util::splitmix64(state)) - 1.0;
    norm_sq += v * v;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0) {
    for (double& v : vec) v /= norm;
  }
  return vec;
}

synthesis::ShotArtifact MockSynthesisBackend::generate(
    const synthesis::SynthesisRequest& request) {
  const storyboard::ShotSpec& shot = request.shot;

  synthesis::ShotArtifact artifact;
  artifact.shot_index = shot.index;
  artifact.mode_used = request.mode;
  artifact.seed = request.seed;
  artifact.duration_s = 0.0;
  artifact.prompt_digest = prompt_digest(shot);

  const int frames = std::max(
      1, static_cast<int>(std::llround(shot.duration_s * world_.fps)));
  artifact.duration_s = frames / world_.fps;

  // Conditioned entities render their canonical identity token; without
  // records (memory disabled) each shot draws from the random token space.
  std::map<std::string, std::string> base;
  for (const auto& id : shot.entities) {
    const gcm::EntityRecord* record = nullptr;
    for (const auto& r : request.entity_records) {
      if (r.entity_id == id) {
        record = &r;
        break;
      }
    }
    if (record) {
      base[id] = canonical_token(record->appearance_vec);
    } else {
      std::uint64_t state = util::mix_seed(
          {world_.seed, request.seed, static_cast<std::uint64_t>(shot.index),
           util::fnv1a64(id)});
      const std::uint64_t mask =
          world_.token_space_bits >= 64
              ? ~0ULL
              : ((1ULL << world_.token_space_bits) - 1ULL);
      base[id] = "rnd:" + util::hex64(util::splitmix64(state) & mask);
    }
  }

  artifact.frame_meta.assign(static_cast<std::size_t>(frames), base);

  // Temporal anchors: the first frame continues the anchor content, the
  // last frame lands on the goal content.
  if ((request.mode == synthesis::Mode::ff2v ||
       request.mode == synthesis::Mode::flf2v) &&
      request.first_frame_anchor &&
      request.first_frame_anchor->kind ==
          synthesis::FrameRef::Kind::artifact_frame) {
    for (const auto& [id, token] : request.first_frame_anchor->tokens) {
      artifact.frame_meta.front()[id] = token;
    }
  }
  if (request.mode == synthesis::Mode::flf2v && request.goal_frame) {
    if (!request.goal_frame->tokens.empty()) {
      for (const auto& [id, token] : request.goal_frame->tokens) {
        artifact.frame_meta.back()[id] = token;
      }
    }
    // A rendered goal frame shows the same conditioned entities, so the
    // final frame already matches `base`.
  }

  artifact.video_ref =
      "mock://video/" +
      util::hex64(util::fnv1a64(util::canonical(
          synthesis::request_to_json(request))));
  return artifact;
}

std::string MockVerifierClient::check_semantic(
    const synthesis::ShotArtifact& artifact, std::span<const int> frames,
    const storyboard::ShotSpec& shot) {
  for (const auto& id : shot.entities) {
    for (int f : frames) {
      const auto& meta =
          artifact.frame_meta[static_cast<std::size_t>(f)];
      if (!meta.count(id)) {
        return "FAIL: missing entity " + id + " in sampled frames";
      }
    }
  }
  if (artifact.prompt_digest != prompt_digest(shot)) {
    return "FAIL: rendered content does not match the scripted description";
  }
  return "PASS";
}

std::string MockVerifierClient::check_identity(
    const synthesis::ShotArtifact& artifact, std::span<const int> frames,
    const gcm::EntityRecord& record) {
  const std::string expected = canonical_token(record.appearance_vec);
  for (int f : frames) {
    const auto& meta = artifact.frame_meta[static_cast<std::size_t>(f)];
    auto it = meta.find(record.entity_id);
    if (it == meta.end()) {
      return "FAIL: " + record.entity_id + " absent from frame " +
             std::to_string(f);
    }
    if (it->second != expected) {
      return "FAIL: appearance drift for " + record.entity_id;
    }
  }
  return "PASS";
}

verifier::VerificationReport mock_verify(const MockWorld&,
                                         const synthesis::ShotArtifact& artifact,
                                         const storyboard::ShotSpec& shot,
                                         const gcm::MemoryStore& store) {
  MockVerifierClient client;
  verifier::FrameSampling sampling;
  sampling.policy = verifier::FrameSampling::Policy::all;
  return verifier::verify(artifact, shot, store, client, sampling);
}

gcm::ArtifactRef MockImageBackend::render_portrait(
    const std::string& prompt, const std::filesystem::path& run_dir,
    const std::string& rel_path) {
  const std::string content = "portrait|" + prompt;
  util::atomic_write_file(run_dir / rel_path, content);
  return gcm::ArtifactRef{rel_path, util::content_digest(content)};
}

void MockPlannerClient::push_response(std::string response) {
  scripted_.push_back(std::move(response));
}

std::string MockPlannerClient::complete(const std::string& system_prompt,
                                        const std::string& user_message) {
  ++calls_;
  users_.push_back(user_message);
  if (!scripted_.empty()) {
    std::string out = scripted_.front();
    scripted_.erase(scripted_.begin());
    return out;
  }
  if (system_prompt == prompts::planner_refine()) {
    return mechanical_refine(user_message);
  }
  if (!plan_payload_.empty()) return plan_payload_;
  return default_plan(user_message);
}

std::string MockPlannerClient::default_plan(
    const std::string& user_message) const {
  // The brief rides in the user message as JSON after the header line.
  std::string concept_text = "untitled concept";
  auto pos = user_message.find('{');
  if (pos != std::string::npos) {
    Json j = Json::parse(user_message.substr(pos), nullptr, false);
    if (!j.is_discarded() && j.contains("concept")) {
      concept_text = j.at("concept").get<std::string>();
    }
  }

  storyboard::StoryboardPlan plan;
  plan.title = concept_text;
  plan.target_audience = "general";
  plan.genre = "slice of life";
  plan.style = "naturalistic";
  plan.pacing = "medium";
  plan.logline = "One recurring character moves through " + concept_text + ".";
  plan.characters.push_back(
      {"lead", "Lead",
       "the same recurring person throughout: " + concept_text});

  for (int i = 1; i <= 4; ++i) {
    storyboard::ShotSpec shot;
    shot.index = i;
    shot.prompt = "Beat " + std::to_string(i) + " of: " + concept_text;
    shot.entities = {"lead"};
    shot.style = plan.style;
    shot.duration_s = 4.0;
    shot.generation_mode = i == 3 ? storyboard::GenerationMode::flf2v
                                  : storyboard::GenerationMode::ff2v;
    shot.camera_angle = i % 2 == 0 ? "medium close-up" : "wide";
    shot.lighting = "natural daylight";
    shot.first_frame_prompt = "Opening frame of beat " + std::to_string(i);
    if (shot.generation_mode == storyboard::GenerationMode::flf2v) {
      shot.last_frame_prompt = "Closing frame of beat " + std::to_string(i);
    }
    shot.connect_to_next = i < 4;
    plan.shots.push_back(std::move(shot));
  }
  return storyboard::serialize_plan(plan);
}

std::string MockPlannerClient::mechanical_refine(
    const std::string& user_message) const {
  auto pos = user_message.find('{');
  Json j = Json::parse(pos == std::string::npos ? "" : user_message.substr(pos),
                       nullptr, false);
  if (j.is_discarded() || !j.contains("shot") || !j.contains("feedback")) {
    return "FAIL: malformed revision request";
  }
  Json shot = j.at("shot");
  const std::string detail = j.at("feedback").value("detail", "");
  auto apply = [&detail](Json& field) {
    field = field.get<std::string>() + " -- " + detail;
  };
  apply(shot.at("prompt"));
  apply(shot.at("first_frame_prompt"));
  if (shot.contains("last_frame_prompt")) apply(shot.at("last_frame_prompt"));
  return util::canonical(shot);
}

}  // namespace coagent::backends
