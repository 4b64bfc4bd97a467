#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semobs/common.hpp"

namespace semobs::log {

/**
 * One decision record of the append-only prediction log (JSONL). Field
 * names and order match the wire schema exactly:
 *
 *   {"clip_id","window_index","gt","decision","z","raw_text",
 *    "tokens_generated","sense_s","preprocess_s","infer_s","post_s",
 *    "total_s","deadline_violated","prompt_hash","backend_id","profile"}
 */
struct PredictionRecord {
  std::string clip_id;
  std::int64_t window_index = 0;
  std::optional<Label> gt;
  DecisionClass decision = DecisionClass::Normal;
  int z = 0;
  std::string raw_text;
  std::int64_t tokens_generated = 0;
  double sense_s = 0.0;
  double preprocess_s = 0.0;
  double infer_s = 0.0;
  double post_s = 0.0;
  double total_s = 0.0;
  bool deadline_violated = false;
  std::string prompt_hash;
  std::string backend_id;
  std::optional<std::string> profile;
};

// Handoff log record: {"trigger_time_s","windows":[ids],"explanations":[...]}.
struct HandoffRecord {
  double trigger_time_s = 0.0;
  std::vector<std::string> windows;
  std::vector<std::string> explanations;
};

/**
 * Run provenance, written as the first line of every log artifact as
 * {"type":"meta",...}. Meta lines are not decision records; readers skip
 * them when scoring or replaying.
 */
struct RunMeta {
  std::string tool_version;
  std::string config_hash;
  std::string prompt_hash;
  std::uint64_t seed = 0;
  int n_min = 2;
  double deadline_s = 1.0;
  std::string backend_id;
  std::optional<std::string> profile;
};

std::string to_json_line(const PredictionRecord& rec);
std::string to_json_line(const HandoffRecord& rec);
std::string to_json_line(const RunMeta& meta);

// Streaming writer used by the orchestrator and the fixture generator.
class PredictionLogWriter {
 public:
  explicit PredictionLogWriter(const std::string& path);
  void write_meta(const RunMeta& meta);
  void write(const PredictionRecord& rec);

 private:
  std::ofstream out_;
};

struct PredictionLogContents {
  std::optional<RunMeta> meta;
  std::vector<PredictionRecord> records;
};

PredictionLogContents read_prediction_log(std::istream& in);
PredictionLogContents read_prediction_log_file(const std::string& path);

void write_handoff_log(const std::string& path, const RunMeta& meta,
                       const std::vector<HandoffRecord>& records);

struct HandoffLogContents {
  std::optional<RunMeta> meta;
  std::vector<HandoffRecord> records;
};

HandoffLogContents read_handoff_log_file(const std::string& path);

}  // namespace semobs::log
