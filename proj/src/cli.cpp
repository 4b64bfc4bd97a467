#include "semobs/cli.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>

#include "semobs/backend.hpp"
#include "semobs/errors.hpp"
#include "semobs/ingest.hpp"
#include "semobs/metrics.hpp"
#include "semobs/orchestrator.hpp"
#include "semobs/prediction_log.hpp"
#include "semobs/prompting.hpp"
#include "semobs/remote_backend.hpp"
#include "semobs/safety_gate.hpp"
#include "semobs/version.hpp"

namespace semobs::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::unique_ptr<backend::Backend> make_backend(const orch::ObserverConfig& cfg) {
  if (cfg.backend.kind == "stochastic") {
    if (cfg.backend.profile.empty()) {
      throw ConfigError("stochastic backend requires backend.profile");
    }
    return std::make_unique<backend::StochasticBackend>(
        backend::resolve_profile(cfg.backend.profile), cfg.seed);
  }
  if (cfg.backend.kind == "replay") {
    if (cfg.backend.path.empty()) throw ConfigError("replay backend requires backend.path");
    return std::make_unique<backend::ReplayBackend>(
        backend::ReplayBackend::from_log_file(cfg.backend.path));
  }
  if (cfg.backend.kind == "remote") {
    if (cfg.backend.endpoint.empty()) throw ConfigError("remote backend requires backend.endpoint");
    // Client timeout sits above the watchdog deadline so abandoned calls
    // still terminate on their own.
    return std::make_unique<backend::RemoteBackend>(cfg.backend.endpoint, cfg.deadline_s + 0.5);
  }
  throw ConfigError("unknown backend kind: " + cfg.backend.kind);
}

orch::ObserverConfig load_run_config(const RunManifest& run) {
  orch::ObserverConfig cfg = orch::ObserverConfig::load_file(run.config_path);
  if (run.profile) cfg.backend.profile = *run.profile;
  if (run.seed) cfg.seed = *run.seed;
  if (run.endpoint) {
    cfg.backend.endpoint = *run.endpoint;
    cfg.backend.kind = "remote";
  }
  return cfg;
}

struct WindowedManifest {
  std::vector<ingest::Window> windows;
  std::vector<ingest::SamplingWarning> warnings;
  std::size_t clips = 0;
};

WindowedManifest window_manifest(const std::string& manifest_path,
                                 const ingest::SamplingConfig& sampling) {
  WindowedManifest out;
  const auto clips = ingest::load_manifest_file(manifest_path);
  out.clips = clips.size();
  for (const auto& clip : clips) {
    auto windows = ingest::sample_windows(clip, sampling, &out.warnings);
    out.windows.insert(out.windows.end(), std::make_move_iterator(windows.begin()),
                       std::make_move_iterator(windows.end()));
  }
  return out;
}

void write_run_stats(const fs::path& path, const orch::RunStats& stats,
                     const WindowedManifest& manifest, const log::RunMeta& meta) {
  ordered_json j;
  j["tool_version"] = meta.tool_version;
  j["config_hash"] = meta.config_hash;
  j["prompt_hash"] = meta.prompt_hash;
  j["seed"] = meta.seed;
  j["clips"] = manifest.clips;
  j["clips_too_short"] = manifest.warnings.size();
  j["windows_total"] = stats.windows_total;
  j["processed"] = stats.processed;
  j["dropped"] = stats.dropped;
  j["timeouts"] = stats.timeouts;
  j["deadline_violations"] = stats.deadline_violations;
  j["budget_violations"] = stats.budget_violations;
  j["handoffs"] = stats.handoffs;
  j["retries"] = stats.retries;
  j["mean_total_s"] = stats.mean_total_s;
  j["elapsed_s"] = stats.elapsed_s;
  ordered_json warnings = ordered_json::array();
  for (const auto& w : manifest.warnings) warnings.push_back(w.clip_id + ": " + w.message);
  for (const auto& w : stats.warnings) warnings.push_back(w);
  j["warnings"] = std::move(warnings);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

int run_pipeline(const RunManifest& run, orch::ObserverConfig cfg) {
  const auto manifest = window_manifest(run.manifest_path, cfg.sampling);
  auto be = make_backend(cfg);
  const auto prompt = prompting::build_prompt(cfg.prompt_tier, cfg.prompt_context);

  const orch::RunResult result = orch::run_observer(manifest.windows, cfg, *be);

  fs::create_directories(run.out_dir);
  log::RunMeta meta;
  meta.tool_version = kToolId;
  meta.config_hash = cfg.hash();
  meta.prompt_hash = prompt.template_hash;
  meta.seed = cfg.seed;
  meta.n_min = cfg.n_min;
  meta.deadline_s = cfg.deadline_s;
  meta.backend_id = be->id();
  meta.profile = be->profile_key();

  const fs::path out_dir(run.out_dir);
  log::PredictionLogWriter writer((out_dir / "predictions.jsonl").string());
  writer.write_meta(meta);
  std::vector<log::PredictionRecord> records;
  records.reserve(result.decisions.size());
  for (const auto& d : result.decisions) {
    records.push_back(orch::to_record(d, meta.prompt_hash, meta.backend_id, meta.profile));
    writer.write(records.back());
  }

  std::vector<log::HandoffRecord> handoffs;
  for (const auto& event : result.handoffs) {
    handoffs.push_back({event.trigger_time_s, event.window_ids, event.explanations});
  }
  log::write_handoff_log((out_dir / "handoffs.jsonl").string(), meta, handoffs);
  write_run_stats(out_dir / "run_stats.json", result.stats, manifest, meta);

  std::cout << "clips: " << manifest.clips << " (too short: " << manifest.warnings.size() << ")\n"
            << "windows: " << result.stats.windows_total << " processed: " << result.stats.processed
            << " dropped: " << result.stats.dropped << "\n"
            << "timeouts: " << result.stats.timeouts << " handoffs: " << result.stats.handoffs
            << " mean latency: " << result.stats.mean_total_s << " s\n";
  if (!records.empty()) {
    if (run.format == "markdown") {
      metrics::Fingerprint fp{meta.prompt_hash, meta.backend_id, meta.profile, meta.n_min,
                              meta.deadline_s};
      const auto report = metrics::build_report(records, cfg.deadline_s, fp);
      std::cout << metrics::emit_report(report, metrics::ReportFormat::MarkdownTable,
                                        cfg.backend.profile.empty() ? cfg.backend.kind
                                                                    : cfg.backend.profile);
    } else {
      const auto matrix = metrics::score_log(records);
      const auto scores = metrics::compute_scores(matrix);
      auto pct = [](const MaybeRatio& r) {
        return r ? std::to_string(r->percent()) + "%" : std::string("n/a");
      };
      std::cout << "tp/tn/fp/fn: " << matrix.tp << "/" << matrix.tn << "/" << matrix.fp << "/"
                << matrix.fn << "  precision: " << pct(scores.precision)
                << "  recall: " << pct(scores.recall) << "  f1: " << pct(scores.f1) << "\n";
    }
  }
  for (const auto& w : result.stats.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "artifacts written to " << out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int cmd_simulate(const RunManifest& run) {
  orch::ObserverConfig cfg = load_run_config(run);
  cfg.clock = orch::ClockMode::Simulated;
  return run_pipeline(run, std::move(cfg));
}

int cmd_run_remote(const RunManifest& run) {
  orch::ObserverConfig cfg = load_run_config(run);
  cfg.clock = orch::ClockMode::WallClock;
  if (cfg.backend.kind != "remote" || cfg.backend.endpoint.empty()) {
    throw ConfigError("run-remote requires a remote endpoint (--endpoint or backend.endpoint)");
  }
  // Fail fast on a dead endpoint; transient failures mid-run degrade to
  // TimedOut decisions instead.
  backend::check_endpoint_reachable(cfg.backend.endpoint, cfg.deadline_s + 0.5);
  return run_pipeline(run, std::move(cfg));
}

namespace {

// Every artifact embeds {tool version, config hash, prompt hash, seed} so
// outputs stay traceable to the run that produced their inputs.
ordered_json artifact_meta(const std::string& config_hash, const std::string& prompt_hash,
                           std::uint64_t seed) {
  ordered_json meta;
  meta["tool_version"] = kToolId;
  meta["config_hash"] = config_hash;
  meta["prompt_hash"] = prompt_hash;
  meta["seed"] = seed;
  return meta;
}

std::string with_meta(const std::string& json_text, const ordered_json& meta) {
  ordered_json body = ordered_json::parse(json_text);
  ordered_json out;
  out["meta"] = meta;
  for (auto& [k, v] : body.items()) out[k] = std::move(v);
  return out.dump(2) + "\n";
}

}  // namespace

int cmd_evaluate(const EvaluateArgs& args) {
  const auto contents = log::read_prediction_log_file(args.log_path);
  if (contents.records.empty()) throw EmptyLog();

  metrics::Fingerprint fingerprint;
  double deadline = 1.0;
  if (contents.meta) {
    fingerprint.prompt_hash = contents.meta->prompt_hash;
    fingerprint.backend_id = contents.meta->backend_id;
    fingerprint.profile = contents.meta->profile;
    fingerprint.n_min = contents.meta->n_min;
    fingerprint.deadline_s = contents.meta->deadline_s;
    deadline = contents.meta->deadline_s;
  }
  if (args.deadline_s) deadline = *args.deadline_s;

  // Shards merge exactly: the confusion matrix is a commutative monoid.
  const auto& records = contents.records;
  metrics::ConfusionMatrix matrix;
  if (args.shards <= 1) {
    matrix = metrics::score_log(records);
  } else {
    const std::size_t shard_count = static_cast<std::size_t>(args.shards);
    std::vector<std::future<metrics::ConfusionMatrix>> futures;
    const std::size_t chunk = (records.size() + shard_count - 1) / shard_count;
    for (std::size_t begin = 0; begin < records.size(); begin += chunk) {
      const std::size_t end = std::min(begin + chunk, records.size());
      futures.push_back(std::async(std::launch::async, [&records, begin, end] {
        return metrics::score_log(
            std::span<const log::PredictionRecord>(records.data() + begin, end - begin));
      }));
    }
    for (auto& f : futures) matrix += f.get();
  }

  metrics::MetricsReport report;
  report.matrix = matrix;
  report.scores = metrics::compute_scores(matrix);
  report.latency = metrics::latency_stats(records, deadline);
  report.fingerprint = fingerprint;
  report.deadline_s = deadline;

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path out_dir(args.out_dir);
  const ordered_json meta =
      artifact_meta(contents.meta ? contents.meta->config_hash : std::string{},
                    fingerprint.prompt_hash, contents.meta ? contents.meta->seed : 0);
  {
    std::ofstream out(out_dir / "report.json");
    if (!out) throw IoError("cannot write report.json");
    out << with_meta(metrics::emit_report(report, metrics::ReportFormat::Json), meta);
  }
  {
    std::ofstream out(out_dir / "report.md");
    if (!out) throw IoError("cannot write report.md");
    out << metrics::emit_report(report, metrics::ReportFormat::MarkdownTable);
  }
  std::cout << metrics::emit_report(report,
                                    args.format == "markdown" ? metrics::ReportFormat::MarkdownTable
                                                              : metrics::ReportFormat::Json);
  return kExitOk;
}

int cmd_gate(const GateArgs& args) {
  const metrics::MetricsReport report = metrics::report_from_json_file(args.report_path);
  const orch::ObserverConfig config = orch::ObserverConfig::load_file(args.config_path);
  const std::vector<gate::SafetyGoal> goals =
      args.goals_path ? gate::load_goals_file(*args.goals_path) : gate::default_goals();

  const gate::GateReport verdict = gate::evaluate(report, config, goals);

  // Carry the scored run's seed forward from the report artifact when present.
  std::uint64_t seed = 0;
  {
    std::ifstream in(args.report_path);
    const auto doc = ordered_json::parse(in, nullptr, false);
    if (doc.is_object() && doc.contains("meta") && doc["meta"].is_object()) {
      seed = doc["meta"].value("seed", std::uint64_t{0});
    }
  }
  const std::string serialized = with_meta(
      gate::gate_report_to_json(verdict),
      artifact_meta(config.hash(), report.fingerprint.prompt_hash, seed));
  if (args.out_path) {
    std::ofstream out(*args.out_path);
    if (!out) throw IoError("cannot write " + *args.out_path);
    out << serialized;
  }
  std::cout << serialized;
  for (const auto& v : verdict.goals) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.goal_id << " (ASIL-"
              << gate::to_string(v.asil) << ")";
    if (v.measured) std::cout << " measured " << *v.measured;
    if (v.gap_pp) std::cout << " gap " << *v.gap_pp << " pp";
    std::cout << "\n";
  }
  std::cout << "overall: " << (verdict.pass ? "PASS" : "FAIL") << "\n";
  return verdict.pass ? kExitOk : kExitGateFail;
}

}  // namespace semobs::cli
