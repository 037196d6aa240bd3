#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coagent/backends/endpoint.hpp"
#include "coagent/backends/scripted.hpp"
#include "coagent/synthesis.hpp"
#include "coagent/util/json.hpp"
#include "coagent/verifier.hpp"

namespace coagent::pipeline {

enum class BackendKind { mock, real };

// Everything a run needs, fully serializable; journaled verbatim in the
// run_started record so resume and replay rebuild identical dependencies.
// Secrets never appear here, only the names of env vars that hold them.
struct RunConfig {
  double tau = 0.9;
  int max_retries = 2;
  bool flf2v_enabled = true;
  bool gcm_enabled = true;  // memory-conditioning ablation switch
  std::uint64_t seed = 0;
  int embed_dim = 64;
  double alpha = 0.3;  // memory blend weight; 1 recovers overwrite
  double vcc_theta = 0.85;
  double delta_margin = 0.05;
  double fps = 16.0;
  int shot_cap = 24;
  std::string pacing_template_id = "default";
  verifier::FrameSampling sampling;
  synthesis::ModeParamsTable mode_params;
  BackendKind backend_kind = BackendKind::mock;
  std::map<std::string, backends::BackendEndpoint> endpoints;
  util::Json mock_plan;  // inline plan the mock planner replies with
  std::vector<backends::FaultScriptEntry> fault_script;

  util::Json to_json() const;
  static RunConfig from_json(const util::Json& j);
  static RunConfig load_file(const std::string& path);
};

}  // namespace coagent::pipeline
