// Regenerates the bundled fixtures: synthetic frame manifests, quantization
// profiles, prediction logs whose confusion matrices equal the benchmark
// tables, matching observer configs, the default goals file, and golden
// report renderings. Everything is seeded and deterministic, so reruns are
// byte-identical.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "semobs/backend.hpp"
#include "semobs/ingest.hpp"
#include "semobs/metrics.hpp"
#include "semobs/orchestrator.hpp"
#include "semobs/prediction_log.hpp"
#include "semobs/prompting.hpp"
#include "semobs/safety_gate.hpp"
#include "semobs/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace semobs;

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << content;
}

std::string frame_line(const std::string& clip, int index, double t, Label label) {
  ordered_json j;
  j["clip_id"] = clip;
  j["frame_index"] = index;
  j["timestamp_s"] = t;
  j["uri"] = "frames/" + clip + "/" + std::to_string(index) + ".png";
  j["label"] = std::string(to_string(label));
  return j.dump();
}

// 224 clips of 40 s at 1 fps. A bit over half the clips contain one
// anomalous span of 4-12 s, so the 5s/2s windowing yields a class mix in
// the same ballpark as the video benchmark (roughly a quarter anomalous).
void gen_hazard_manifest(const fs::path& path) {
  std::mt19937_64 rng(42);
  std::ostringstream out;
  for (int c = 1; c <= 224; ++c) {
    std::ostringstream clip;
    clip << "hp_" << std::setw(4) << std::setfill('0') << c;
    const bool has_anomaly = uniform01(rng) < 0.55;
    int span_start = 0, span_len = 0;
    if (has_anomaly) {
      span_start = static_cast<int>(uniform01(rng) * 30.0);
      span_len = 4 + static_cast<int>(uniform01(rng) * 9.0);
    }
    for (int i = 0; i <= 40; ++i) {
      const bool anomalous = has_anomaly && i >= span_start && i < span_start + span_len;
      out << frame_line(clip.str(), i, static_cast<double>(i),
                        anomalous ? Label::Anomaly : Label::Normal)
          << "\n";
    }
  }
  write_file(path, out.str());
}

// Small demo manifest: three usable clips plus one too short for a window.
void gen_demo_manifest(const fs::path& jsonl_path, const fs::path& csv_path) {
  struct Spec {
    std::string clip;
    int frames;
    int anomaly_from, anomaly_to;  // [from, to), -1 for none
  };
  const std::vector<Spec> specs = {
      {"demo_calm", 13, -1, -1},
      {"demo_pothole", 13, 5, 9},
      {"demo_debris", 17, 10, 14},
      {"demo_short", 4, -1, -1},
  };
  std::ostringstream jsonl, csv;
  csv << "clip_id,frame_index,timestamp_s,uri,label\n";
  for (const auto& s : specs) {
    for (int i = 0; i < s.frames; ++i) {
      const bool anomalous = s.anomaly_from >= 0 && i >= s.anomaly_from && i < s.anomaly_to;
      const Label label = anomalous ? Label::Anomaly : Label::Normal;
      jsonl << frame_line(s.clip, i, static_cast<double>(i), label) << "\n";
      csv << s.clip << "," << i << "," << static_cast<double>(i) << ",frames/" << s.clip << "/"
          << i << ".png," << to_string(label) << "\n";
    }
  }
  write_file(jsonl_path, jsonl.str());
  write_file(csv_path, csv.str());
}

struct TableLog {
  std::string file;
  metrics::ConfusionMatrix matrix;
  double infer_s;
  prompting::PromptTier tier;
  std::string profile;
  std::uint64_t shuffle_seed;
};

orch::ObserverConfig static_config(const std::string& profile, prompting::PromptTier tier) {
  orch::ObserverConfig cfg;
  cfg.sampling = {1, 1.0, 1.0, 1.0};  // single-frame windows for static-image runs
  cfg.prompt_tier = tier;
  cfg.backend.kind = "stochastic";
  cfg.backend.profile = profile;
  cfg.seed = 1;
  return cfg;
}

orch::ObserverConfig video_config(const std::string& profile) {
  orch::ObserverConfig cfg;
  cfg.sampling = {5, 1.0, 5.0, 2.0};
  cfg.prompt_tier = prompting::PromptTier::Minimal;
  cfg.backend.kind = "stochastic";
  cfg.backend.profile = profile;
  cfg.seed = 1;
  cfg.rearm_after_handoff = true;
  return cfg;
}

void gen_table_logs_and_configs(const fs::path& root) {
  const std::vector<TableLog> logs = {
      // Static-image benchmarks (per-image decisions).
      {"table3_nf4_verbose", {806, 279, 168, 909}, 0.80, prompting::PromptTier::Verbose,
       "NF4_Verbose_static", 101},
      {"table3_int8_verbose", {773, 301, 146, 942}, 1.33, prompting::PromptTier::Verbose,
       "INT8_Verbose_static", 102},
      {"table3_int8_pruned", {215, 263, 184, 1500}, 1.37, prompting::PromptTier::Pruned,
       "INT8_Pruned_static", 103},
      // Video-stream benchmarks (per-window decisions).
      {"table4_bf16", {51, 96, 84, 15}, 0.485, prompting::PromptTier::Minimal, "BF16_video", 104},
      {"table4_int8", {50, 99, 81, 16}, 0.787, prompting::PromptTier::Minimal, "INT8_video", 105},
      {"table4_nf4", {7, 162, 18, 59}, 0.436, prompting::PromptTier::Minimal, "NF4_video", 106},
  };

  for (const auto& spec : logs) {
    const bool video = spec.file.rfind("table4", 0) == 0;
    orch::ObserverConfig cfg = video ? video_config(spec.profile)
                                     : static_config(spec.profile, spec.tier);
    const std::string config_name =
        video ? "eval_" + spec.file + ".json"
              : "eval_" + spec.file + ".json";
    write_file(root / "configs" / config_name, cfg.to_json_string() + "\n");

    const auto& tpl = prompting::template_for(spec.tier);
    metrics::SynthesisOptions opts;
    opts.clip_prefix = spec.file;
    opts.infer_s = spec.infer_s;
    opts.deadline_s = cfg.deadline_s;
    opts.prompt_hash = tpl.hash;
    opts.backend_id = "fixture";
    opts.profile = spec.profile;
    opts.xml_format = spec.tier != prompting::PromptTier::Minimal;
    opts.shuffle_seed = spec.shuffle_seed;
    const auto records = metrics::synthesize_records(spec.matrix, opts);

    log::RunMeta meta;
    meta.tool_version = kToolId;
    meta.config_hash = cfg.hash();
    meta.prompt_hash = tpl.hash;
    meta.seed = cfg.seed;
    meta.n_min = cfg.n_min;
    meta.deadline_s = cfg.deadline_s;
    meta.backend_id = "fixture";
    meta.profile = spec.profile;

    fs::create_directories(root / "logs");
    log::PredictionLogWriter writer((root / "logs" / (spec.file + ".jsonl")).string());
    writer.write_meta(meta);
    for (const auto& r : records) writer.write(r);

    // Golden report renderings, frozen after checking the percentages
    // against the benchmark tables by hand.
    metrics::Fingerprint fp{meta.prompt_hash, meta.backend_id, meta.profile, meta.n_min,
                            meta.deadline_s};
    const auto report = metrics::build_report(records, meta.deadline_s, fp);
    write_file(root / "golden" / ("report_" + spec.file + ".json"),
               metrics::emit_report(report, metrics::ReportFormat::Json, spec.file));
    write_file(root / "golden" / ("report_" + spec.file + ".md"),
               metrics::emit_report(report, metrics::ReportFormat::MarkdownTable, spec.file));
  }
}

void gen_profiles(const fs::path& dir) {
  for (const auto& p : backend::builtin_profiles()) {
    write_file(dir / (p.key + ".json"), backend::profile_to_json(p) + "\n");
  }
}

void gen_sim_configs(const fs::path& dir) {
  write_file(dir / "sim_bf16_video.json", video_config("BF16_video").to_json_string() + "\n");
  write_file(dir / "sim_int8_video.json", video_config("INT8_video").to_json_string() + "\n");
  write_file(dir / "sim_nf4_video.json", video_config("NF4_video").to_json_string() + "\n");
  write_file(dir / "sim_oracle.json", video_config("oracle").to_json_string() + "\n");

  orch::ObserverConfig remote = video_config("");
  remote.backend.kind = "remote";
  remote.backend.profile.clear();
  remote.backend.endpoint = "http://127.0.0.1:8077";
  remote.clock = orch::ClockMode::WallClock;
  write_file(dir / "remote_demo.json", remote.to_json_string() + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the bundled fixtures"};
  std::string out = "fixtures";
  app.add_option("--out", out, "fixture root directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(out);
  gen_hazard_manifest(root / "manifests" / "hazard_synthetic_224.jsonl");
  gen_demo_manifest(root / "manifests" / "demo_small.jsonl", root / "manifests" / "demo_small.csv");
  gen_profiles(root / "profiles");
  gen_sim_configs(root / "configs");
  gen_table_logs_and_configs(root);
  write_file(root / "goals" / "default_goals.json", gate::goals_to_json(gate::default_goals()));

  std::cout << "fixtures written under " << root.string() << "\n";
  return 0;
}
