#include "coagent/synthesis.hpp"

#include <cmath>

namespace coagent::synthesis {

using util::Json;

const ModeParams& ModeParamsTable::for_mode(Mode mode) const {
  switch (mode) {
    case Mode::t2v:
      return t2v;
    case Mode::ff2v:
      return ff2v;
    case Mode::flf2v:
      return flf2v;
  }
  return t2v;
}

Mode select_mode(std::optional<double> prev_score, double tau, double overlap,
                 const storyboard::ShotSpec& shot, bool flf2v_enabled,
                 double delta) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw PreconditionError("tau must lie in (0,1]");
  }
  if (overlap < 0.0 || overlap > 1.0) {
    throw PreconditionError("overlap must lie in [0,1]");
  }

  if (shot.index <= 1 || !prev_score.has_value()) return Mode::t2v;
  if (overlap == 0.0) return Mode::t2v;
  if (flf2v_enabled && shot.generation_mode == Mode::flf2v) return Mode::flf2v;
  if (std::abs(*prev_score - tau) <= delta) return Mode::ff2v;
  if (*prev_score < tau - delta) {
    return flf2v_enabled ? Mode::flf2v : Mode::ff2v;
  }
  return Mode::ff2v;
}

Mode escalate_mode(Mode mode, bool flf2v_enabled) {
  switch (mode) {
    case Mode::t2v:
      return Mode::ff2v;
    case Mode::ff2v:
      return flf2v_enabled ? Mode::flf2v : Mode::ff2v;
    case Mode::flf2v:
      return Mode::flf2v;
  }
  return mode;
}

Json frame_ref_to_json(const FrameRef& ref) {
  Json j;
  if (ref.kind == FrameRef::Kind::artifact_frame) {
    j["frame_index"] = ref.frame_index;
    j["kind"] = "artifact_frame";
    j["video_ref"] = ref.video_ref;
  } else {
    j["kind"] = "rendered";
    j["prompt"] = ref.prompt;
  }
  j["tokens"] = ref.tokens;
  return j;
}

FrameRef frame_ref_from_json(const Json& j) {
  FrameRef ref;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "artifact_frame") {
    ref.kind = FrameRef::Kind::artifact_frame;
    ref.video_ref = j.at("video_ref").get<std::string>();
    ref.frame_index = j.at("frame_index").get<int>();
  } else {
    ref.kind = FrameRef::Kind::rendered;
    ref.prompt = j.at("prompt").get<std::string>();
  }
  ref.tokens = j.at("tokens").get<std::map<std::string, std::string>>();
  return ref;
}

Json artifact_to_json(const ShotArtifact& artifact) {
  Json j;
  j["duration_s"] = artifact.duration_s;
  j["frame_meta"] = artifact.frame_meta;
  j["mode_used"] = storyboard::to_string(artifact.mode_used);
  j["prompt_digest"] = artifact.prompt_digest;
  j["seed"] = artifact.seed;
  j["shot_index"] = artifact.shot_index;
  j["video_ref"] = artifact.video_ref;
  return j;
}

ShotArtifact artifact_from_json(const Json& j) {
  ShotArtifact a;
  a.duration_s = j.at("duration_s").get<double>();
  a.frame_meta =
      j.at("frame_meta")
          .get<std::vector<std::map<std::string, std::string>>>();
  a.mode_used = storyboard::mode_from_string(j.at("mode_used").get<std::string>());
  a.prompt_digest = j.at("prompt_digest").get<std::string>();
  a.seed = j.at("seed").get<std::uint64_t>();
  a.shot_index = j.at("shot_index").get<int>();
  a.video_ref = j.at("video_ref").get<std::string>();
  return a;
}

Json request_to_json(const SynthesisRequest& request) {
  Json j;
  j["backend_params"] = Json{{"checkpoint_id", request.backend_params.checkpoint_id},
                             {"resolution", Json::array({request.backend_params.width,
                                                         request.backend_params.height})},
                             {"steps", request.backend_params.steps}};
  Json records = Json::array();
  for (const auto& r : request.entity_records) {
    records.push_back(gcm::record_to_json(r));
  }
  j["entity_records"] = records;
  if (request.first_frame_anchor) {
    j["first_frame_anchor"] = frame_ref_to_json(*request.first_frame_anchor);
  }
  if (request.goal_frame) {
    j["goal_frame"] = frame_ref_to_json(*request.goal_frame);
  }
  j["mode"] = storyboard::to_string(request.mode);
  j["seed"] = request.seed;
  j["shot"] = storyboard::shot_to_json(request.shot);
  return j;
}

SynthesisRequest request_from_json(const Json& j) {
  SynthesisRequest r;
  const Json& bp = j.at("backend_params");
  r.backend_params.checkpoint_id = bp.at("checkpoint_id").get<std::string>();
  r.backend_params.width = bp.at("resolution").at(0).get<int>();
  r.backend_params.height = bp.at("resolution").at(1).get<int>();
  r.backend_params.steps = bp.at("steps").get<int>();
  for (const auto& rec : j.at("entity_records")) {
    gcm::EntityRecord er;
    er.entity_id = rec.at("entity_id").get<std::string>();
    er.appearance_vec = rec.at("appearance_vec").get<std::vector<double>>();
    er.attributes =
        rec.at("attributes").get<std::map<std::string, std::string>>();
    er.last_update_step = rec.at("last_update_step").get<int>();
    if (rec.contains("portrait_ref")) {
      er.portrait_ref =
          gcm::ArtifactRef{rec.at("portrait_ref").at("uri").get<std::string>(),
                           rec.at("portrait_ref").at("digest").get<std::string>()};
    }
    r.entity_records.push_back(std::move(er));
  }
  if (j.contains("first_frame_anchor")) {
    r.first_frame_anchor = frame_ref_from_json(j.at("first_frame_anchor"));
  }
  if (j.contains("goal_frame")) {
    r.goal_frame = frame_ref_from_json(j.at("goal_frame"));
  }
  r.mode = storyboard::mode_from_string(j.at("mode").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  std::vector<storyboard::Violation> violations;
  r.shot = storyboard::shot_from_json(j.at("shot"), &violations, "shot");
  if (!violations.empty()) {
    throw storyboard::PlanParseError(std::move(violations));
  }
  return r;
}

Json vcc_to_json(const VccReport& report) {
  Json j;
  j["pass"] = report.pass;
  j["per_entity_similarity"] = report.per_entity_similarity;
  j["theta"] = report.theta;
  return j;
}

SynthesisRequest build_request(const storyboard::ShotSpec& shot, Mode mode,
                               const gcm::MemoryStore& store,
                               const std::optional<ShotArtifact>& prev,
                               bool prev_connected,
                               const ModeParamsTable& params,
                               std::uint64_t seed, bool gcm_enabled,
                               gcm::LookupMeter* meter) {
  SynthesisRequest request;
  request.shot = shot;
  request.mode = mode;
  request.backend_params = params.for_mode(mode);
  request.seed = seed;

  if (gcm_enabled) {
    for (const auto& id : shot.entities) {
      auto record = gcm::retrieve(store, id, meter);
      if (!record) {
        throw UnknownEntity("shot " + std::to_string(shot.index) +
                            " references unregistered entity " + id);
      }
      request.entity_records.push_back(std::move(*record));
    }
  }

  const bool needs_first_frame = mode == Mode::ff2v || mode == Mode::flf2v;
  if (needs_first_frame) {
    if (prev) {
      // Temporal anchoring: always lock onto the previous artifact's final
      // frame when one exists.
      FrameRef anchor;
      anchor.kind = FrameRef::Kind::artifact_frame;
      anchor.video_ref = prev->video_ref;
      anchor.frame_index = prev->frame_count() - 1;
      if (!prev->frame_meta.empty()) {
        anchor.tokens = prev->frame_meta.back();
      }
      request.first_frame_anchor = std::move(anchor);
    } else if (shot.index > 1 && prev_connected) {
      throw MissingAnchor("shot " + std::to_string(shot.index) +
                          " expects continuity but no previous artifact exists");
    } else {
      FrameRef rendered;
      rendered.kind = FrameRef::Kind::rendered;
      rendered.prompt = shot.first_frame_prompt;
      request.first_frame_anchor = std::move(rendered);
    }
  }

  if (mode == Mode::flf2v) {
    FrameRef goal;
    goal.kind = FrameRef::Kind::rendered;
    // Escalated shots may lack a planner goal prompt; the shot prompt is the
    // fallback rendering source.
    goal.prompt = shot.last_frame_prompt.value_or(shot.prompt);
    request.goal_frame = std::move(goal);
  }

  return request;
}

ShotArtifact synthesize(const SynthesisRequest& request,
                        SynthesisBackend& backend) {
  if (request.mode == Mode::flf2v && !request.goal_frame) {
    throw PreconditionError("flf2v synthesis requires a goal frame");
  }
  ShotArtifact artifact = backend.generate(request);
  artifact.mode_used = request.mode;
  artifact.seed = request.seed;
  return artifact;
}

namespace {

double cosine_clamped(const std::vector<double>& a,
                      const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
  return cos < 0.0 ? 0.0 : (cos > 1.0 ? 1.0 : cos);
}

}  // namespace

VccReport vcc_check(const ShotArtifact& artifact,
                    const std::vector<gcm::EntityRecord>& records,
                    gcm::FeatureExtractor& extractor, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw PreconditionError("vcc theta must lie in (0,1]");
  }
  VccReport report;
  report.theta = theta;
  for (const auto& record : records) {
    double min_sim = 1.0;
    for (const auto& frame : artifact.frame_meta) {
      auto it = frame.find(record.entity_id);
      if (it == frame.end()) {
        min_sim = 0.0;  // entity absent from a frame counts as total drift
        break;
      }
      const std::vector<double> observed = extractor.embed(it->second);
      min_sim = std::min(min_sim, cosine_clamped(record.appearance_vec, observed));
    }
    if (artifact.frame_meta.empty()) min_sim = 0.0;
    report.per_entity_similarity[record.entity_id] = min_sim;
    if (min_sim < theta) report.pass = false;
  }
  return report;
}

}  // namespace coagent::synthesis
