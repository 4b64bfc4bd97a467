#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semobs/common.hpp"

namespace semobs::ingest {

/**
 * One timestamped RGB frame reference. Pixel data is never dereferenced
 * here; `uri` is carried through to the backend untouched.
 */
struct Frame {
  std::string clip_id;
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;
  std::optional<std::string> uri;
  std::optional<Label> label;
  // Reserved ego-state channel; opaque to the decision path.
  std::map<std::string, std::string> ego_state;
};

struct SamplingConfig {
  int k = 5;                      // frames per window
  double fps = 1.0;               // sampling rate inside a window
  double window_duration_s = 5.0;
  double stride_s = 2.0;

  // Throws ConfigError unless k == round(window_duration_s * fps) and all
  // quantities are positive. Strides longer than the window (gaps) are legal.
  void validate() const;
};

/**
 * A k-frame temporal window. `frames` holds exactly k entries, ordered by
 * sampling-grid position. The ground-truth label is the OR over member
 * frame labels: any anomalous frame makes the window anomalous.
 */
struct Window {
  std::string clip_id;
  std::int64_t window_index = 0;
  std::vector<Frame> frames;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<Label> label;

  // "clip_id:window_index", used in handoff logs.
  std::string id() const { return clip_id + ":" + std::to_string(window_index); }
};

struct Clip {
  std::string clip_id;
  std::vector<Frame> frames;  // sorted by frame_index
};

enum class ManifestFormat { Jsonl, Csv };

// Parses a frame manifest and groups records per clip, sorted by frame
// index. Clips are returned in lexicographic clip_id order so downstream
// runs are deterministic regardless of record order in the stream.
// Throws MalformedRecord / DuplicateFrame / NonMonotonicTimestamp.
std::vector<Clip> load_manifest(std::istream& in, ManifestFormat format);

// Dispatches on extension: .jsonl/.json -> JSONL, .csv -> CSV.
std::vector<Clip> load_manifest_file(const std::string& path);

// Last timestamp minus first; 0 for clips with fewer than two frames.
double clip_duration_s(const Clip& clip);

// Closed-form window count: floor((duration - window_duration)/stride) + 1,
// clamped at 0.
std::int64_t window_count(double clip_duration_s, const SamplingConfig& cfg);

struct SamplingWarning {
  std::string clip_id;
  std::string message;
};

// Enumerates sliding windows over one clip. Start offsets are
// 0, stride, 2*stride, ... relative to the first frame, kept while
// start + window_duration <= clip duration. Each grid point
// start + j/fps (j = 0..k-1) selects the nearest frame by timestamp,
// ties to the earlier frame. Windows never span clips.
//
// A clip shorter than one window yields zero windows plus a warning record;
// it is not an error.
std::vector<Window> sample_windows(const Clip& clip, const SamplingConfig& cfg,
                                   std::vector<SamplingWarning>* warnings = nullptr);

}  // namespace semobs::ingest
