#include "coagent/backends/runtime.hpp"

namespace coagent::backends {

pipeline::Deps Runtime::deps() {
  pipeline::Deps d;
  d.planner = planner.get();
  d.verifier = verifier.get();
  d.synth = synth.get();
  d.extractor = extractor.get();
  d.image = image.get();
  return d;
}

namespace {

BackendEndpoint require_endpoint(const pipeline::RunConfig& config,
                                 const std::string& name) {
  auto it = config.endpoints.find(name);
  if (it == config.endpoints.end() || it->second.base_url.empty()) {
    throw Error("real backend requires an endpoint named \"" + name +
                "\" in the config");
  }
  return it->second;
}

}  // namespace

Runtime make_runtime(const pipeline::RunConfig& config) {
  Runtime rt;
  rt.extractor = std::make_unique<HashFeatureExtractor>(config.embed_dim);

  if (config.backend_kind == pipeline::BackendKind::mock) {
    MockWorld world;
    world.seed = config.seed;
    world.fps = config.fps;

    rt.planner = std::make_unique<MockPlannerClient>(
        config.mock_plan.is_null() ? std::string{}
                                   : util::canonical(config.mock_plan));
    if (config.fault_script.empty()) {
      rt.verifier = std::make_unique<MockVerifierClient>();
    } else {
      rt.verifier =
          std::make_unique<ScriptedOverlayVerifier>(config.fault_script);
    }
    rt.synth = std::make_unique<MockSynthesisBackend>(world);
    rt.image = std::make_unique<MockImageBackend>();
    return rt;
  }

  rt.planner =
      std::make_unique<HttpPlannerClient>(require_endpoint(config, "planner"));
  rt.verifier = std::make_unique<HttpVerifierClient>(
      require_endpoint(config, "verifier"));
  const BackendEndpoint synth_endpoint = require_endpoint(config, "synthesizer");
  rt.synth = std::make_unique<HttpSynthesisBackend>(synth_endpoint);
  rt.image = std::make_unique<HttpImageBackend>(synth_endpoint);
  return rt;
}

}  // namespace coagent::backends
