#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semobs/common.hpp"
#include "semobs/prediction_log.hpp"
#include "semobs/rational.hpp"

namespace semobs::metrics {

/**
 * 2x2 confusion counts plus side counters for decisions that never reached
 * a clean binary verdict. Forms a commutative monoid under +, so logs can
 * be scored in parallel shards and merged.
 */
struct ConfusionMatrix {
  std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::int64_t unknowns = 0, unparseables = 0, timeouts = 0;

  std::int64_t scored() const { return tp + tn + fp + fn; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) { return a += b; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Scoring rule: Anomaly gt scored against the decision class directly;
// Unknown/Unparseable/TimedOut count as FN on anomalous ground truth and as
// TN (with their side counter) on normal ground truth — the observer failed
// to detect, which is the conservative reading.
// Throws MissingGroundTruth for records without gt.
ConfusionMatrix score_log(std::span<const log::PredictionRecord> records);

struct Scores {
  MaybeRatio precision;
  MaybeRatio recall;
  MaybeRatio f1;
  MaybeRatio accuracy;
  MaybeRatio balanced_accuracy;
  MaybeRatio specificity;
};

// Exact rational ratios; 0/0 stays undefined rather than collapsing to 0.
Scores compute_scores(const ConfusionMatrix& m);

struct LatencyStats {
  double mean_s = 0.0;
  double p50_s = 0.0;  // nearest-rank percentiles
  double p95_s = 0.0;
  double max_s = 0.0;
  std::int64_t violations = 0;  // count(total_s > deadline_s)
};

// Throws EmptyLog when no records carry a latency.
LatencyStats latency_stats(std::span<const log::PredictionRecord> records, double deadline_s);

// Configuration provenance a report is valid for.
struct Fingerprint {
  std::string prompt_hash;
  std::string backend_id;
  std::optional<std::string> profile;
  int n_min = 2;
  double deadline_s = 1.0;
};

struct MetricsReport {
  ConfusionMatrix matrix;
  Scores scores;
  LatencyStats latency;
  Fingerprint fingerprint;
  double deadline_s = 1.0;
};

MetricsReport build_report(std::span<const log::PredictionRecord> records, double deadline_s,
                           Fingerprint fingerprint);

enum class ReportFormat { Json, MarkdownTable };

// Deterministic serialization; the markdown column order follows the
// video-benchmark table layout (TP TN FP FN, precision, recall, F1,
// accuracy, balanced accuracy, latency).
std::string emit_report(const MetricsReport& report, ReportFormat format,
                        const std::string& config_label = "run");

MetricsReport report_from_json_file(const std::string& path);

struct SynthesisOptions {
  std::string clip_prefix = "synthetic";
  double infer_s = 0.5;
  double deadline_s = 1.0;
  std::string prompt_hash;
  std::string backend_id = "fixture";
  std::optional<std::string> profile;
  bool xml_format = false;  // wrap raw_text in <think>/<answer> tags
  std::uint64_t shuffle_seed = 7;
};

// Inverse of score_log: emits one record per confusion cell (side counters
// on normal gt included), deterministically shuffled. score_log of the
// result reproduces the matrix exactly.
std::vector<log::PredictionRecord> synthesize_records(const ConfusionMatrix& matrix,
                                                      const SynthesisOptions& opts);

}  // namespace semobs::metrics
