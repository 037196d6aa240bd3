#include "coagent/config.hpp"

#include "coagent/util/fs.hpp"

namespace coagent::pipeline {

using util::Json;

namespace {

std::string policy_to_string(verifier::FrameSampling::Policy p) {
  switch (p) {
    case verifier::FrameSampling::Policy::keyframes:
      return "keyframes";
    case verifier::FrameSampling::Policy::uniform:
      return "uniform";
    case verifier::FrameSampling::Policy::all:
      return "all";
  }
  return "keyframes";
}

verifier::FrameSampling::Policy policy_from_string(const std::string& s) {
  if (s == "keyframes") return verifier::FrameSampling::Policy::keyframes;
  if (s == "uniform") return verifier::FrameSampling::Policy::uniform;
  if (s == "all") return verifier::FrameSampling::Policy::all;
  throw Error("unknown sampling policy: " + s);
}

Json mode_params_to_json(const synthesis::ModeParams& p) {
  return Json{{"checkpoint_id", p.checkpoint_id},
              {"resolution", Json::array({p.width, p.height})},
              {"steps", p.steps}};
}

synthesis::ModeParams mode_params_from_json(const Json& j,
                                            synthesis::ModeParams base) {
  for (const auto& key :
       util::unknown_keys(j, {"checkpoint_id", "resolution", "steps"})) {
    throw Error("unknown mode_params key: " + key);
  }
  if (j.contains("checkpoint_id")) {
    base.checkpoint_id = j.at("checkpoint_id").get<std::string>();
  }
  if (j.contains("resolution")) {
    base.width = j.at("resolution").at(0).get<int>();
    base.height = j.at("resolution").at(1).get<int>();
  }
  if (j.contains("steps")) base.steps = j.at("steps").get<int>();
  return base;
}

backends::BackendEndpoint endpoint_from_json(const Json& j) {
  for (const auto& key : util::unknown_keys(
           j, {"base_url", "timeout_s", "token_env", "transport_retries"})) {
    throw Error("unknown endpoint key: " + key);
  }
  backends::BackendEndpoint e;
  e.base_url = j.value("base_url", std::string{});
  e.auth_token_env = j.value("token_env", std::string{});
  e.timeout_s = j.value("timeout_s", 60.0);
  e.transport_retries = j.value("transport_retries", 1);
  if (e.timeout_s <= 0.0) throw Error("endpoint timeout_s must be > 0");
  return e;
}

}  // namespace

Json RunConfig::to_json() const {
  Json j;
  j["alpha"] = alpha;
  j["backend"] = backend_kind == BackendKind::mock ? "mock" : "real";
  j["delta_margin"] = delta_margin;
  j["embed_dim"] = embed_dim;
  Json eps = Json::object();
  for (const auto& [name, e] : endpoints) {
    eps[name] = Json{{"base_url", e.base_url},
                     {"timeout_s", e.timeout_s},
                     {"token_env", e.auth_token_env},
                     {"transport_retries", e.transport_retries}};
  }
  j["endpoints"] = eps;
  Json faults = Json::array();
  for (const auto& f : fault_script) {
    faults.push_back(Json{{"attempt", f.attempt},
                          {"entity", f.entity},
                          {"shot", f.shot},
                          {"stage", f.stage},
                          {"verdict", f.verdict}});
  }
  j["fault_script"] = faults;
  j["flf2v_enabled"] = flf2v_enabled;
  j["fps"] = fps;
  j["gcm_enabled"] = gcm_enabled;
  j["max_retries"] = max_retries;
  if (!mock_plan.is_null()) j["mock_plan"] = mock_plan;
  j["mode_params"] = Json{{"ff2v", mode_params_to_json(mode_params.ff2v)},
                          {"flf2v", mode_params_to_json(mode_params.flf2v)},
                          {"t2v", mode_params_to_json(mode_params.t2v)}};
  j["pacing_template_id"] = pacing_template_id;
  j["sampling"] =
      Json{{"k", sampling.k}, {"policy", policy_to_string(sampling.policy)}};
  j["seed"] = seed;
  j["shot_cap"] = shot_cap;
  j["tau"] = tau;
  j["vcc_theta"] = vcc_theta;
  return j;
}

RunConfig RunConfig::from_json(const Json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& key : util::unknown_keys(
           j, {"alpha", "backend", "delta_margin", "embed_dim", "endpoints",
               "fault_script", "flf2v_enabled", "fps", "gcm_enabled",
               "max_retries", "mock_plan", "mock_plan_file", "mode_params",
               "pacing_template_id", "sampling", "seed", "shot_cap", "tau",
               "vcc_theta"})) {
    throw Error("unknown config key: " + key);
  }

  RunConfig c;
  c.tau = j.value("tau", c.tau);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.flf2v_enabled = j.value("flf2v_enabled", c.flf2v_enabled);
  c.gcm_enabled = j.value("gcm_enabled", c.gcm_enabled);
  c.seed = j.value("seed", c.seed);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.alpha = j.value("alpha", c.alpha);
  c.vcc_theta = j.value("vcc_theta", c.vcc_theta);
  c.delta_margin = j.value("delta_margin", c.delta_margin);
  c.fps = j.value("fps", c.fps);
  c.shot_cap = j.value("shot_cap", c.shot_cap);
  c.pacing_template_id = j.value("pacing_template_id", c.pacing_template_id);

  if (j.contains("backend")) {
    const std::string kind = j.at("backend").get<std::string>();
    if (kind == "mock") {
      c.backend_kind = BackendKind::mock;
    } else if (kind == "real") {
      c.backend_kind = BackendKind::real;
    } else {
      throw Error("config backend must be mock or real, got " + kind);
    }
  }

  if (j.contains("sampling")) {
    const Json& s = j.at("sampling");
    for (const auto& key : util::unknown_keys(s, {"k", "policy"})) {
      throw Error("unknown sampling key: " + key);
    }
    if (s.contains("policy")) {
      c.sampling.policy = policy_from_string(s.at("policy").get<std::string>());
    }
    c.sampling.k = s.value("k", c.sampling.k);
  }

  if (j.contains("mode_params")) {
    const Json& mp = j.at("mode_params");
    for (const auto& key : util::unknown_keys(mp, {"ff2v", "flf2v", "t2v"})) {
      throw Error("unknown mode_params key: " + key);
    }
    if (mp.contains("t2v")) {
      c.mode_params.t2v = mode_params_from_json(mp.at("t2v"), c.mode_params.t2v);
    }
    if (mp.contains("ff2v")) {
      c.mode_params.ff2v =
          mode_params_from_json(mp.at("ff2v"), c.mode_params.ff2v);
    }
    if (mp.contains("flf2v")) {
      c.mode_params.flf2v =
          mode_params_from_json(mp.at("flf2v"), c.mode_params.flf2v);
    }
  }

  if (j.contains("endpoints")) {
    for (const auto& item : j.at("endpoints").items()) {
      c.endpoints[item.key()] = endpoint_from_json(item.value());
    }
  }

  if (j.contains("mock_plan")) {
    c.mock_plan = j.at("mock_plan");
  }
  if (j.contains("mock_plan_file")) {
    // Resolved eagerly so journaled configs are self-contained.
    c.mock_plan = util::must_parse(
        util::read_file(j.at("mock_plan_file").get<std::string>()),
        "mock_plan_file");
  }

  if (j.contains("fault_script")) {
    for (const auto& f : j.at("fault_script")) {
      for (const auto& key : util::unknown_keys(
               f, {"attempt", "entity", "shot", "stage", "verdict"})) {
        throw Error("unknown fault_script key: " + key);
      }
      backends::FaultScriptEntry entry;
      entry.shot = f.value("shot", 0);
      entry.attempt = f.value("attempt", 0);
      entry.stage = f.value("stage", std::string("semantic"));
      entry.verdict = f.value("verdict", std::string("FAIL: scripted failure"));
      entry.entity = f.value("entity", std::string{});
      if (entry.stage != "semantic" && entry.stage != "identity") {
        throw Error("fault_script stage must be semantic or identity");
      }
      c.fault_script.push_back(std::move(entry));
    }
  }

  if (!(c.tau > 0.0 && c.tau <= 1.0)) throw Error("tau must lie in (0,1]");
  if (c.max_retries < 0) throw Error("max_retries must be >= 0");
  if (c.embed_dim < 1) throw Error("embed_dim must be >= 1");
  if (c.alpha < 0.0 || c.alpha > 1.0) throw Error("alpha must lie in [0,1]");
  if (c.shot_cap < 1) throw Error("shot_cap must be >= 1");
  if (c.fps <= 0.0) throw Error("fps must be > 0");
  return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
  return from_json(util::must_parse(util::read_file(path), "config " + path));
}

}  // namespace coagent::pipeline
