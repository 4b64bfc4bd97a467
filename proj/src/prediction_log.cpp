#include "semobs/prediction_log.hpp"

#include <json.hpp>

#include <istream>

#include "semobs/errors.hpp"

namespace semobs::log {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const PredictionRecord& r) {
  ordered_json j;
  j["clip_id"] = r.clip_id;
  j["window_index"] = r.window_index;
  if (r.gt) {
    j["gt"] = std::string(to_string(*r.gt));
  } else {
    j["gt"] = nullptr;
  }
  j["decision"] = std::string(to_string(r.decision));
  j["z"] = r.z;
  j["raw_text"] = r.raw_text;
  j["tokens_generated"] = r.tokens_generated;
  j["sense_s"] = r.sense_s;
  j["preprocess_s"] = r.preprocess_s;
  j["infer_s"] = r.infer_s;
  j["post_s"] = r.post_s;
  j["total_s"] = r.total_s;
  j["deadline_violated"] = r.deadline_violated;
  j["prompt_hash"] = r.prompt_hash;
  j["backend_id"] = r.backend_id;
  if (r.profile) {
    j["profile"] = *r.profile;
  } else {
    j["profile"] = nullptr;
  }
  return j;
}

PredictionRecord record_from_json(const ordered_json& j, std::size_t line_no) {
  PredictionRecord r;
  try {
    r.clip_id = j.at("clip_id").get<std::string>();
    r.window_index = j.at("window_index").get<std::int64_t>();
    if (j.contains("gt") && !j.at("gt").is_null()) {
      r.gt = label_from_string(j.at("gt").get<std::string>());
    }
    const auto decision = decision_class_from_string(j.at("decision").get<std::string>());
    if (!decision) throw MalformedRecord(line_no, "unknown decision class");
    r.decision = *decision;
    r.z = j.at("z").get<int>();
    r.raw_text = j.value("raw_text", std::string{});
    r.tokens_generated = j.value("tokens_generated", std::int64_t{0});
    r.sense_s = j.value("sense_s", 0.0);
    r.preprocess_s = j.value("preprocess_s", 0.0);
    r.infer_s = j.value("infer_s", 0.0);
    r.post_s = j.value("post_s", 0.0);
    r.total_s = j.value("total_s", 0.0);
    r.deadline_violated = j.value("deadline_violated", false);
    r.prompt_hash = j.value("prompt_hash", std::string{});
    r.backend_id = j.value("backend_id", std::string{});
    if (j.contains("profile") && !j.at("profile").is_null()) {
      r.profile = j.at("profile").get<std::string>();
    }
  } catch (const ordered_json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
  return r;
}

RunMeta meta_from_json(const ordered_json& j) {
  RunMeta m;
  m.tool_version = j.value("tool_version", std::string{});
  m.config_hash = j.value("config_hash", std::string{});
  m.prompt_hash = j.value("prompt_hash", std::string{});
  m.seed = j.value("seed", std::uint64_t{0});
  m.n_min = j.value("n_min", 2);
  m.deadline_s = j.value("deadline_s", 1.0);
  m.backend_id = j.value("backend_id", std::string{});
  if (j.contains("profile") && !j.at("profile").is_null()) {
    m.profile = j.at("profile").get<std::string>();
  }
  return m;
}

bool is_meta(const ordered_json& j) {
  return j.is_object() && j.value("type", std::string{}) == "meta";
}

}  // namespace

std::string to_json_line(const PredictionRecord& rec) { return to_json(rec).dump(); }

std::string to_json_line(const HandoffRecord& rec) {
  ordered_json j;
  j["trigger_time_s"] = rec.trigger_time_s;
  j["windows"] = rec.windows;
  j["explanations"] = rec.explanations;
  return j.dump();
}

std::string to_json_line(const RunMeta& meta) {
  ordered_json j;
  j["type"] = "meta";
  j["tool_version"] = meta.tool_version;
  j["config_hash"] = meta.config_hash;
  j["prompt_hash"] = meta.prompt_hash;
  j["seed"] = meta.seed;
  j["n_min"] = meta.n_min;
  j["deadline_s"] = meta.deadline_s;
  j["backend_id"] = meta.backend_id;
  if (meta.profile) {
    j["profile"] = *meta.profile;
  } else {
    j["profile"] = nullptr;
  }
  return j.dump();
}

PredictionLogWriter::PredictionLogWriter(const std::string& path) : out_(path) {
  if (!out_) throw IoError("cannot open prediction log for writing: " + path);
}

void PredictionLogWriter::write_meta(const RunMeta& meta) {
  out_ << to_json_line(meta) << '\n';
}

void PredictionLogWriter::write(const PredictionRecord& rec) {
  out_ << to_json_line(rec) << '\n';
}

PredictionLogContents read_prediction_log(std::istream& in) {
  PredictionLogContents contents;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j = ordered_json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw MalformedRecord(line_no, "invalid JSON");
    if (is_meta(j)) {
      contents.meta = meta_from_json(j);
      continue;
    }
    contents.records.push_back(record_from_json(j, line_no));
  }
  return contents;
}

PredictionLogContents read_prediction_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction log: " + path);
  return read_prediction_log(in);
}

void write_handoff_log(const std::string& path, const RunMeta& meta,
                       const std::vector<HandoffRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open handoff log for writing: " + path);
  out << to_json_line(meta) << '\n';
  for (const auto& rec : records) out << to_json_line(rec) << '\n';
}

HandoffLogContents read_handoff_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open handoff log: " + path);
  HandoffLogContents contents;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j = ordered_json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw MalformedRecord(line_no, "invalid JSON");
    if (is_meta(j)) {
      contents.meta = meta_from_json(j);
      continue;
    }
    HandoffRecord rec;
    try {
      rec.trigger_time_s = j.at("trigger_time_s").get<double>();
      rec.windows = j.at("windows").get<std::vector<std::string>>();
      rec.explanations = j.at("explanations").get<std::vector<std::string>>();
    } catch (const ordered_json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    contents.records.push_back(std::move(rec));
  }
  return contents;
}

}  // namespace semobs::log
