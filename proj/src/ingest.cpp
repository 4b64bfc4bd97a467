#include "semobs/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <utility>

#include "semobs/errors.hpp"

namespace semobs::ingest {

namespace {

using nlohmann::json;

// Tolerance for "start + duration fits in the clip" grid decisions. Inputs
// are decimal seconds; 1e-9 swamps parse noise without admitting bogus
// windows.
constexpr double kGridEps = 1e-9;

Frame frame_from_json(const json& j, std::size_t line_no) {
  if (!j.is_object()) throw MalformedRecord(line_no, "expected a JSON object");
  Frame f;
  try {
    f.clip_id = j.at("clip_id").get<std::string>();
    f.frame_index = j.at("frame_index").get<std::int64_t>();
    f.timestamp_s = j.at("timestamp_s").get<double>();
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
  if (f.frame_index < 0) throw MalformedRecord(line_no, "frame_index must be >= 0");
  if (f.timestamp_s < 0) throw MalformedRecord(line_no, "timestamp_s must be >= 0");
  if (auto it = j.find("uri"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRecord(line_no, "uri must be a string or null");
    f.uri = it->get<std::string>();
  }
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRecord(line_no, "label must be a string or null");
    auto label = label_from_string(it->get<std::string>());
    if (!label) throw MalformedRecord(line_no, "label must be Normal or Anomaly");
    f.label = *label;
  }
  if (auto it = j.find("ego_state"); it != j.end() && it->is_object()) {
    for (const auto& [k, v] : it->items()) {
      f.ego_state[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return f;
}

// Minimal CSV row splitter with double-quote escaping.
std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

Frame frame_from_csv(const std::vector<std::string>& header, const std::string& line,
                     std::size_t line_no) {
  const auto cols = split_csv_row(line);
  auto get = [&](const std::string& name) -> const std::string* {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        if (i >= cols.size()) return nullptr;
        return &cols[i];
      }
    }
    return nullptr;
  };

  const std::string* clip = get("clip_id");
  const std::string* index = get("frame_index");
  const std::string* ts = get("timestamp_s");
  if (!clip || clip->empty()) throw MalformedRecord(line_no, "missing clip_id");
  if (!index || index->empty()) throw MalformedRecord(line_no, "missing frame_index");
  if (!ts || ts->empty()) throw MalformedRecord(line_no, "missing timestamp_s");

  Frame f;
  f.clip_id = *clip;
  try {
    std::size_t pos = 0;
    f.frame_index = std::stoll(*index, &pos);
    if (pos != index->size()) throw MalformedRecord(line_no, "bad frame_index");
    f.timestamp_s = std::stod(*ts, &pos);
    if (pos != ts->size()) throw MalformedRecord(line_no, "bad timestamp_s");
  } catch (const std::logic_error&) {
    throw MalformedRecord(line_no, "numeric field failed to parse");
  }
  if (f.frame_index < 0) throw MalformedRecord(line_no, "frame_index must be >= 0");
  if (f.timestamp_s < 0) throw MalformedRecord(line_no, "timestamp_s must be >= 0");
  if (const std::string* uri = get("uri"); uri && !uri->empty()) f.uri = *uri;
  if (const std::string* label = get("label"); label && !label->empty()) {
    auto parsed = label_from_string(*label);
    if (!parsed) throw MalformedRecord(line_no, "label must be Normal or Anomaly");
    f.label = *parsed;
  }
  return f;
}

std::vector<Clip> group_frames(std::vector<Frame> frames) {
  std::map<std::string, std::vector<Frame>> by_clip;
  std::set<std::pair<std::string, std::int64_t>> seen;
  for (auto& f : frames) {
    if (!seen.emplace(f.clip_id, f.frame_index).second) {
      throw DuplicateFrame(f.clip_id, f.frame_index);
    }
    by_clip[f.clip_id].push_back(std::move(f));
  }

  std::vector<Clip> clips;
  clips.reserve(by_clip.size());
  for (auto& [clip_id, clip_frames] : by_clip) {
    std::sort(clip_frames.begin(), clip_frames.end(),
              [](const Frame& a, const Frame& b) { return a.frame_index < b.frame_index; });
    for (std::size_t i = 1; i < clip_frames.size(); ++i) {
      if (clip_frames[i].timestamp_s < clip_frames[i - 1].timestamp_s) {
        throw NonMonotonicTimestamp(clip_id, clip_frames[i].frame_index);
      }
    }
    clips.push_back(Clip{clip_id, std::move(clip_frames)});
  }
  return clips;
}

}  // namespace

void SamplingConfig::validate() const {
  if (k <= 0) throw ConfigError("sampling.k must be positive");
  if (fps <= 0) throw ConfigError("sampling.fps must be positive");
  if (window_duration_s <= 0) throw ConfigError("sampling.window_duration_s must be positive");
  if (stride_s <= 0) throw ConfigError("sampling.stride_s must be positive");
  const double expected = window_duration_s * fps;
  if (std::llround(expected) != k) {
    throw ConfigError("sampling.k must equal round(window_duration_s * fps); got k=" +
                      std::to_string(k) + " for " + std::to_string(expected));
  }
}

std::vector<Clip> load_manifest(std::istream& in, ManifestFormat format) {
  std::vector<Frame> frames;
  std::string line;
  std::size_t line_no = 0;

  if (format == ManifestFormat::Jsonl) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (j.is_discarded()) throw MalformedRecord(line_no, "invalid JSON");
      frames.push_back(frame_from_json(j, line_no));
    }
  } else {
    std::vector<std::string> header;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (header.empty()) {
        header = split_csv_row(line);
        continue;
      }
      frames.push_back(frame_from_csv(header, line, line_no));
    }
  }
  return group_frames(std::move(frames));
}

std::vector<Clip> load_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  const bool csv = path.size() > 4 && path.substr(path.size() - 4) == ".csv";
  return load_manifest(in, csv ? ManifestFormat::Csv : ManifestFormat::Jsonl);
}

double clip_duration_s(const Clip& clip) {
  if (clip.frames.size() < 2) return 0.0;
  return clip.frames.back().timestamp_s - clip.frames.front().timestamp_s;
}

std::int64_t window_count(double clip_duration_s, const SamplingConfig& cfg) {
  const double usable = clip_duration_s - cfg.window_duration_s;
  if (usable < -kGridEps) return 0;
  return static_cast<std::int64_t>(std::floor((usable + kGridEps) / cfg.stride_s)) + 1;
}

std::vector<Window> sample_windows(const Clip& clip, const SamplingConfig& cfg,
                                   std::vector<SamplingWarning>* warnings) {
  cfg.validate();
  std::vector<Window> windows;
  if (clip.frames.empty()) return windows;

  const double t0 = clip.frames.front().timestamp_s;
  const double duration = clip_duration_s(clip);
  if (duration + kGridEps < cfg.window_duration_s) {
    if (warnings) {
      warnings->push_back({clip.clip_id, "clip too short for one window (duration " +
                                             std::to_string(duration) + " s < " +
                                             std::to_string(cfg.window_duration_s) + " s)"});
    }
    return windows;
  }

  // Nearest frame by timestamp, ties to the earlier frame. The clip is
  // sorted by frame_index with nondecreasing timestamps, so a binary search
  // over timestamps is valid.
  auto nearest_frame = [&](double t) -> const Frame& {
    auto it = std::lower_bound(
        clip.frames.begin(), clip.frames.end(), t,
        [](const Frame& f, double value) { return f.timestamp_s < value; });
    if (it == clip.frames.begin()) return *it;
    if (it == clip.frames.end()) return clip.frames.back();
    const Frame& later = *it;
    const Frame& earlier = *(it - 1);
    return (t - earlier.timestamp_s) <= (later.timestamp_s - t) ? earlier : later;
  };

  for (std::int64_t i = 0;; ++i) {
    const double offset = static_cast<double>(i) * cfg.stride_s;
    if (offset + cfg.window_duration_s > duration + kGridEps) break;

    Window w;
    w.clip_id = clip.clip_id;
    w.window_index = i;
    w.start_s = t0 + offset;
    w.end_s = w.start_s + cfg.window_duration_s;
    w.frames.reserve(static_cast<std::size_t>(cfg.k));
    bool anomalous = false;
    for (int j = 0; j < cfg.k; ++j) {
      const Frame& f = nearest_frame(w.start_s + static_cast<double>(j) / cfg.fps);
      anomalous = anomalous || (f.label && *f.label == Label::Anomaly);
      w.frames.push_back(f);
    }
    w.label = anomalous ? Label::Anomaly : Label::Normal;
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace semobs::ingest
