#include <CLI11.hpp>

#include <iostream>

#include "semobs/cli.hpp"
#include "semobs/errors.hpp"
#include "semobs/version.hpp"

// Flag precedence is flags > env > config file: CLI11 resolves flag-vs-env,
// and anything absent from both falls through to the config file's values.
int main(int argc, char** argv) {
  CLI::App app{"Semantic observer harness: sliding-window anomaly decisions, "
               "debounced fail-safe handoffs, metric scoring and safety gating"};
  app.set_version_flag("--version", semobs::kToolId);
  app.require_subcommand(1);

  semobs::cli::RunManifest run;
  std::string profile_flag;
  std::string endpoint_flag;
  std::uint64_t seed_flag = 0;

  auto add_run_flags = [&](CLI::App* cmd, bool remote) {
    cmd->add_option("--config", run.config_path, "observer config (JSON)")
        ->envname("SEMOBS_CONFIG")
        ->required();
    cmd->add_option("--manifest", run.manifest_path, "frame manifest (.jsonl or .csv)")
        ->envname("SEMOBS_MANIFEST")
        ->required();
    cmd->add_option("--out", run.out_dir, "output directory for logs")
        ->envname("SEMOBS_OUT")
        ->required();
    cmd->add_option("--profile", profile_flag, "quantization profile: builtin key or profile file")
        ->envname("SEMOBS_PROFILE");
    cmd->add_option("--seed", seed_flag, "PRNG seed override")->envname("SEMOBS_SEED");
    cmd->add_option("--format", run.format, "summary format: json|markdown")
        ->envname("SEMOBS_FORMAT")
        ->check(CLI::IsMember({"json", "markdown"}));
    if (remote) {
      cmd->add_option("--endpoint", endpoint_flag, "inference server base URL")
          ->envname("SEMOBS_ENDPOINT");
    }
  };

  CLI::App* simulate =
      app.add_subcommand("simulate", "simulated-time run with a stochastic backend");
  add_run_flags(simulate, /*remote=*/false);

  CLI::App* run_remote = app.add_subcommand("run-remote", "wall-clock run against a live server");
  add_run_flags(run_remote, /*remote=*/true);

  semobs::cli::EvaluateArgs eval;
  double deadline_flag = 1.0;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a prediction log into a metrics report");
  evaluate->add_option("--log", eval.log_path, "prediction log (JSONL)")->required();
  evaluate->add_option("--out", eval.out_dir, "output directory for report files")
      ->envname("SEMOBS_OUT")
      ->required();
  evaluate->add_option("--deadline", deadline_flag,
                       "latency deadline in seconds (default: the log meta's value)");
  evaluate->add_option("--shards", eval.shards, "score in N parallel shards and merge");
  evaluate->add_option("--format", eval.format, "stdout format: json|markdown")
      ->envname("SEMOBS_FORMAT")
      ->check(CLI::IsMember({"json", "markdown"}));

  semobs::cli::GateArgs gate;
  std::string goals_path;
  std::string gate_out;
  CLI::App* gate_cmd = app.add_subcommand("gate", "check a metrics report against safety goals");
  gate_cmd->add_option("--report", gate.report_path, "metrics report (JSON)")->required();
  gate_cmd->add_option("--config", gate.config_path, "observer config the report belongs to")
      ->envname("SEMOBS_CONFIG")
      ->required();
  gate_cmd
      ->add_option("--goals", goals_path, "goals file (JSON list); defaults to the built-in four")
      ->envname("SEMOBS_GOALS");
  gate_cmd->add_option("--out", gate_out, "write the gate report here")->envname("SEMOBS_OUT");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed() || run_remote->parsed()) {
      CLI::App* active = simulate->parsed() ? simulate : run_remote;
      if (active->count("--profile") > 0) run.profile = profile_flag;
      if (active->count("--seed") > 0) run.seed = seed_flag;
      if (run_remote->parsed() && active->count("--endpoint") > 0) run.endpoint = endpoint_flag;
      return simulate->parsed() ? semobs::cli::cmd_simulate(run)
                                : semobs::cli::cmd_run_remote(run);
    }
    if (evaluate->parsed()) {
      if (evaluate->count("--deadline") > 0) eval.deadline_s = deadline_flag;
      return semobs::cli::cmd_evaluate(eval);
    }
    if (gate_cmd->parsed()) {
      if (!goals_path.empty()) gate.goals_path = goals_path;
      if (!gate_out.empty()) gate.out_path = gate_out;
      return semobs::cli::cmd_gate(gate);
    }
  } catch (const semobs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return semobs::cli::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return semobs::cli::kExitError;
  }
  return semobs::cli::kExitError;
}
