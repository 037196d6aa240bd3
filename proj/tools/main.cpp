#include <unistd.h>

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coagent/backends/runtime.hpp"
#include "coagent/pipeline.hpp"
#include "coagent/simulator.hpp"
#include "coagent/util/fs.hpp"

namespace {

using coagent::util::Json;

// stdout carries machine-readable JSON; stderr carries human diagnostics.
void emit(const Json& j) { std::cout << coagent::util::canonical(j) << "\n"; }

std::string load_idea_text(const std::string& value) {
  if (!value.empty() && value[0] == '@') {
    return coagent::util::read_file(value.substr(1));
  }
  return value;
}

int exit_code_for(const coagent::pipeline::RunManifest& manifest) {
  return manifest.degraded ? 2 : 0;
}

struct RunArgs {
  std::string idea;
  std::string config_path;
  std::string backend;
  std::string out_dir;
  std::string pacing;
  std::string fault_script_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_gcm = false;
  bool no_flf2v = false;
  int crash_after_shot = 0;
};

coagent::pipeline::RunConfig resolve_config(const RunArgs& args) {
  coagent::pipeline::RunConfig config;
  if (!args.config_path.empty()) {
    config = coagent::pipeline::RunConfig::load_file(args.config_path);
  }
  if (!args.backend.empty()) {
    if (args.backend == "mock") {
      config.backend_kind = coagent::pipeline::BackendKind::mock;
    } else if (args.backend == "real") {
      config.backend_kind = coagent::pipeline::BackendKind::real;
    } else {
      throw coagent::Error("--backend must be mock or real");
    }
  }
  if (args.seed_set) config.seed = args.seed;
  if (!args.pacing.empty()) config.pacing_template_id = args.pacing;
  if (args.no_gcm) config.gcm_enabled = false;
  if (args.no_flf2v) config.flf2v_enabled = false;
  if (!args.fault_script_path.empty()) {
    Json extra = coagent::util::must_parse(
        coagent::util::read_file(args.fault_script_path), "fault script");
    Json merged = config.to_json();
    merged["fault_script"] = extra;
    config = coagent::pipeline::RunConfig::from_json(merged);
  }
  return config;
}

int cmd_run(const RunArgs& args) {
  const auto config = resolve_config(args);
  coagent::storyboard::Idea idea;
  idea.concept_text = load_idea_text(args.idea);
  if (!config.pacing_template_id.empty()) {
    idea.pacing_template_id = config.pacing_template_id;
  }

  auto runtime = coagent::backends::make_runtime(config);
  auto deps = runtime.deps();
  if (args.crash_after_shot > 0) {
    const int crash_at = args.crash_after_shot;
    deps.hooks.after_shot = [crash_at](int shot) {
      if (shot == crash_at) {
        // Hard exit with no cleanup: everything before this point must
        // already be durable.
        _exit(137);
      }
    };
  }

  const auto manifest = coagent::pipeline::run(idea, config, deps, args.out_dir);
  Json out;
  out["degraded"] = manifest.degraded;
  out["manifest"] = (std::filesystem::path(args.out_dir) / "manifest.json").string();
  out["run_id"] = manifest.run_id;
  emit(out);
  return exit_code_for(manifest);
}

int cmd_resume(const std::string& run_dir) {
  const auto state = coagent::pipeline::reconstruct_state(run_dir);
  auto runtime = coagent::backends::make_runtime(state.config);
  auto deps = runtime.deps();
  const auto manifest = coagent::pipeline::resume(run_dir, deps);
  Json out;
  out["degraded"] = manifest.degraded;
  out["manifest"] = (std::filesystem::path(run_dir) / "manifest.json").string();
  out["run_id"] = manifest.run_id;
  emit(out);
  return exit_code_for(manifest);
}

int cmd_validate_plan(const std::string& path) {
  try {
    coagent::storyboard::parse_plan_json(coagent::util::read_file(path));
    emit(Json{{"ok", true}, {"violations", Json::array()}});
    return 0;
  } catch (const coagent::storyboard::PlanParseError& e) {
    Json violations = Json::array();
    for (const auto& v : e.violations()) {
      violations.push_back(Json{
          {"message", v.message}, {"rule", v.rule_id}, {"where", v.where}});
    }
    emit(Json{{"ok", false}, {"violations", violations}});
    return 1;
  }
}

int cmd_simulate(double p1, double q, int max_attempts, std::uint64_t shots,
                 std::uint64_t seed, bool fit_paper) {
  if (fit_paper) {
    emit(coagent::simulator::fit_report_to_json(
        coagent::simulator::fit_to_paper()));
    return 0;
  }
  coagent::simulator::RetryModel model;
  model.p1 = p1;
  model.q = q;
  model.max_attempts = max_attempts;
  model.n_shots = shots;
  model.seed = seed;
  Json out;
  out["analytic"] =
      coagent::simulator::stats_to_json(coagent::simulator::analytic_stats(model));
  out["simulated"] =
      coagent::simulator::stats_to_json(coagent::simulator::simulate(model));
  emit(out);
  return 0;
}

int cmd_inspect(const std::string& run_dir) {
  const auto state = coagent::pipeline::reconstruct_state(run_dir);
  Json shots = Json::array();
  for (const auto& s : state.done_shots) {
    shots.push_back(Json{{"accepted_attempt", s.accepted_attempt},
                         {"attempts", s.attempts},
                         {"converged", s.converged},
                         {"identity_consistent", s.identity_consistent},
                         {"mode", coagent::storyboard::to_string(s.mode)},
                         {"score", s.score},
                         {"shot_index", s.shot_index}});
  }
  Json out;
  out["per_shot"] = shots;
  out["phase"] = coagent::pipeline::to_string(state.phase);
  out["run_id"] = state.run_id;
  out["shots_total"] = state.shots_total;
  emit(out);
  return 0;
}

int cmd_replay(const std::string& run_dir, int shot) {
  const auto state = coagent::pipeline::reconstruct_state(run_dir);
  if (state.config.backend_kind != coagent::pipeline::BackendKind::mock) {
    throw coagent::Error("replay requires deterministic (mock) backends");
  }
  auto runtime = coagent::backends::make_runtime(state.config);
  auto deps = runtime.deps();
  const auto result = coagent::pipeline::replay_shot(run_dir, shot, deps);
  Json out;
  out["attempts"] = result.attempts;
  out["detail"] = result.detail;
  out["match"] = result.match;
  out["shot"] = result.shot;
  emit(out);
  return result.match ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coagent: closed-loop multi-shot video generation engine"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Execute a full run from an idea");
  run_cmd->add_option("--idea", run_args.idea,
                      "Concept text, or @path to a text file")
      ->required();
  run_cmd->add_option("--config", run_args.config_path, "Config JSON path");
  run_cmd->add_option("--backend", run_args.backend, "mock or real");
  auto* seed_opt = run_cmd->add_option("--seed", run_args.seed, "Run seed");
  run_cmd->add_option("--pacing", run_args.pacing, "Pacing template id");
  run_cmd->add_flag("--no-gcm", run_args.no_gcm,
                    "Disable memory conditioning (ablation)");
  run_cmd->add_flag("--no-flf2v", run_args.no_flf2v,
                    "Disable the flf2v mode (ablation)");
  run_cmd->add_option("--fault-script", run_args.fault_script_path,
                      "Scripted verifier overrides (JSON array)");
  run_cmd
      ->add_option("--crash-after-shot", run_args.crash_after_shot,
                   "Testing aid: hard-exit after this shot completes")
      ->group("");  // hidden
  run_cmd->add_option("--out", run_args.out_dir, "Run directory (must be empty)")
      ->required();

  std::string resume_dir;
  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  resume_cmd->add_option("run_dir", resume_dir, "Run directory")->required();

  std::string plan_path;
  auto* validate_cmd =
      app.add_subcommand("validate-plan", "Strictly validate a plan file");
  validate_cmd->add_option("plan", plan_path, "Plan JSON path")->required();

  double p1 = 0.72, q = 0.6;
  int max_attempts = 3;
  std::uint64_t sim_shots = 100000, sim_seed = 0;
  bool fit_paper = false;
  auto* sim_cmd =
      app.add_subcommand("simulate", "Regeneration-economics simulator");
  sim_cmd->add_option("--p1", p1, "First-attempt pass probability")
      ->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--q", q, "Per-retry pass probability")
      ->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--max-attempts", max_attempts, "Attempt cap")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--shots", sim_shots, "Trial count");
  sim_cmd->add_option("--seed", sim_seed, "Simulation seed");
  sim_cmd->add_flag("--fit-paper", fit_paper,
                    "Fit q to the reported statistics and report feasibility");

  std::string inspect_dir;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a run directory");
  inspect_cmd->add_option("run_dir", inspect_dir, "Run directory")->required();

  std::string replay_dir;
  int replay_shot_index = 0;
  auto* replay_cmd = app.add_subcommand(
      "replay", "Re-execute one shot's loop and check journal equivalence");
  replay_cmd->add_option("run_dir", replay_dir, "Run directory")->required();
  replay_cmd->add_option("--shot", replay_shot_index, "Shot index")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (*run_cmd) {
      run_args.seed_set = seed_opt->count() > 0;
      return cmd_run(run_args);
    }
    if (*resume_cmd) return cmd_resume(resume_dir);
    if (*validate_cmd) return cmd_validate_plan(plan_path);
    if (*sim_cmd) {
      return cmd_simulate(p1, q, max_attempts, sim_shots, sim_seed, fit_paper);
    }
    if (*inspect_cmd) return cmd_inspect(inspect_dir);
    if (*replay_cmd) return cmd_replay(replay_dir, replay_shot_index);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
