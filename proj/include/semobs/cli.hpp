#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace semobs::cli {

// Exit codes: 0 success / gate PASS, 1 operational error, 2 gate FAIL.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitGateFail = 2;

/**
 * One run's inputs: where the config and manifest live, what backend to
 * use, where artifacts go. Flag/env overrides are resolved before this
 * struct is built (precedence: flags > env > config file).
 */
struct RunManifest {
  std::string config_path;
  std::string manifest_path;
  std::optional<std::string> profile;   // overrides config.backend.profile
  std::optional<std::uint64_t> seed;    // overrides config.seed
  std::optional<std::string> endpoint;  // overrides config.backend.endpoint
  std::string out_dir;
  std::string format = "json";  // json | markdown
};

// ingest -> prompting -> stochastic backend -> orchestrator in simulated
// time; writes predictions.jsonl, handoffs.jsonl and run_stats.json under
// out_dir and prints a summary.
int cmd_simulate(const RunManifest& run);

struct EvaluateArgs {
  std::string log_path;
  std::string out_dir;
  // Explicit flag wins; otherwise the log meta's deadline; otherwise 1.0 s.
  std::optional<double> deadline_s;
  int shards = 1;  // matrices merge as a monoid, so sharding is exact
  std::string format = "json";
};

int cmd_evaluate(const EvaluateArgs& args);

struct GateArgs {
  std::string report_path;
  std::string config_path;
  std::optional<std::string> goals_path;
  std::optional<std::string> out_path;
};

// Returns 0 on PASS, 2 on FAIL.
int cmd_gate(const GateArgs& args);

// Wall-clock run against a live inference server.
int cmd_run_remote(const RunManifest& run);

}  // namespace semobs::cli
