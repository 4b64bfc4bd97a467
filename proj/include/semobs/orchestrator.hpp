#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semobs/backend.hpp"
#include "semobs/common.hpp"
#include "semobs/ingest.hpp"
#include "semobs/prediction_log.hpp"
#include "semobs/prompting.hpp"

namespace semobs::orch {

/**
 * Per-decision latency decomposition. total_s is always the exact sum
 * ((sense + preprocess) + infer) + post, fixed association so repeated runs
 * are bit-identical.
 */
struct LatencyBreakdown {
  double sense_s = 0.0;
  double preprocess_s = 0.0;
  double infer_s = 0.0;
  double post_s = 0.0;
  double total_s = 0.0;
};

// Throws NegativeComponent on any negative input.
LatencyBreakdown account_latency(double sense_s, double preprocess_s, double infer_s,
                                 double post_s);

struct WindowRef {
  std::string clip_id;
  std::int64_t window_index = 0;
  std::optional<Label> label;
  double end_s = 0.0;

  std::string id() const { return clip_id + ":" + std::to_string(window_index); }
};

struct ObserverDecision {
  WindowRef window;
  DecisionClass decision_class = DecisionClass::Normal;
  int z = 0;
  std::optional<prompting::ParsedVerdict> verdict;  // absent when timed out
  LatencyBreakdown latency;
  bool deadline_violated = false;
  std::int64_t tokens_generated = 0;
  std::int64_t budget_overshoot = 0;  // tokens past T_max; 0 when compliant
  double decided_at_s = 0.0;          // completion time on the run clock
  std::string raw_text;
};

enum class Phase { Nominal, Candidate, Triggered, HandoffAcked };

std::string_view to_string(Phase p);

struct Contributor {
  std::string window_id;
  std::string explanation;
  LatencyBreakdown latency;
};

/**
 * Debounce state: n_min consecutive positive decisions arm and fire the
 * fail-safe trigger. Any z=0 decision (including Unknown/Unparseable/
 * TimedOut) resets the streak. Once TRIGGERED the state latches and absorbs
 * further decisions until reset().
 */
struct DebounceState {
  int n_min = 2;
  int consecutive_positives = 0;
  Phase phase = Phase::Nominal;
  std::vector<Contributor> pending;  // current streak, size == consecutive_positives
};

struct HandoffEvent {
  double trigger_time_s = 0.0;
  std::vector<std::string> window_ids;  // exactly n_min, consecutive
  std::vector<std::string> explanations;
  LatencyBreakdown latency_of_last;
};

// Advances the debounce machine by one decision; emits the handoff event on
// the transition into TRIGGERED.
std::optional<HandoffEvent> step(DebounceState& state, const ObserverDecision& decision);

// Re-arm: back to NOMINAL with a zero counter. Idempotent.
void reset(DebounceState& state);

// TRIGGERED -> HANDOFF_ACKED once the fail-safe stack confirms receipt.
void acknowledge(DebounceState& state);

enum class ClockMode { Simulated, WallClock };

struct BackendSelection {
  std::string kind = "stochastic";  // stochastic | replay | remote
  std::string profile;              // builtin key or profile file path
  std::string path;                 // replay log path
  std::string endpoint;             // remote base URL
};

struct ObserverConfig {
  double rate_hz = 1.0;
  double deadline_s = 1.0;
  int n_min = 2;
  ingest::SamplingConfig sampling;
  prompting::PromptTier prompt_tier = prompting::PromptTier::Verbose;
  prompting::Context prompt_context;
  BackendSelection backend;
  ClockMode clock = ClockMode::Simulated;
  std::uint64_t seed = 1;
  double sense_s = 0.0;
  double preprocess_s = 0.0;
  double post_s = 0.0;
  int max_retries = 2;
  bool rearm_after_handoff = false;  // default latches until explicit reset

  // Hard errors throw ConfigError; soft issues (e.g. deadline longer than
  // the observer period, so cycles can overlap) come back as warnings.
  std::vector<std::string> validate() const;

  std::string to_json_string() const;  // canonical form, defaults explicit
  static ObserverConfig from_json_string(const std::string& text);
  static ObserverConfig load_file(const std::string& path);

  // SHA-256 of the canonical JSON form; embedded in every artifact.
  std::string hash() const;
};

struct RunStats {
  std::int64_t windows_total = 0;
  std::int64_t processed = 0;
  std::int64_t dropped = 0;  // displaced by a newer due window
  std::int64_t timeouts = 0;  // ASIL-tracked hazardous events
  std::int64_t deadline_violations = 0;
  std::int64_t budget_violations = 0;
  std::int64_t handoffs = 0;
  std::int64_t retries = 0;
  double mean_total_s = 0.0;
  double elapsed_s = 0.0;  // virtual clock span (simulated) or wall time
  std::vector<std::string> warnings;
};

struct RunResult {
  std::vector<ObserverDecision> decisions;
  std::vector<HandoffEvent> handoffs;
  RunStats stats;
};

/**
 * Runs the observer loop over a window stream (sorted by clip, then window
 * index; windows never cross clips and the debounce streak resets at clip
 * boundaries).
 *
 * Simulated mode advances a virtual clock in 1/rate_hz ticks: a window is
 * due once the clock passes its end_s; while an inference is in flight newer
 * windows queue up, and on the next idle tick only the newest due window is
 * processed (latest-window-wins, older ones are dropped). A decision whose
 * total latency exceeds deadline_s is recorded as TimedOut with z = 0 and
 * the verdict abandoned.
 *
 * Wall-clock mode sweeps every window in order against a live backend; a
 * watchdog abandons any call that misses the deadline without corrupting
 * the loop, and retryable backend errors are retried with bounded backoff
 * until the deadline passes.
 */
RunResult run_observer(const std::vector<ingest::Window>& windows, const ObserverConfig& cfg,
                       backend::Backend& be);

// Converts a decision to its prediction-log record.
log::PredictionRecord to_record(const ObserverDecision& d, const std::string& prompt_hash,
                                const std::string& backend_id,
                                const std::optional<std::string>& profile);

}  // namespace semobs::orch
