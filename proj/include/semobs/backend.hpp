#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semobs/common.hpp"
#include "semobs/ingest.hpp"
#include "semobs/prediction_log.hpp"
#include "semobs/prompting.hpp"

namespace semobs::backend {

enum class Quant { BF16, INT8, NF4, Custom };
enum class Modality { Static, Video };

std::string_view to_string(Quant q);
std::string_view to_string(Modality m);
std::optional<Quant> quant_from_string(std::string_view s);
std::optional<Modality> modality_from_string(std::string_view s);

struct ConfusionCounts {
  std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/**
 * Behavioral model of a weight-precision configuration: hit/false-alarm
 * rates plus a latency distribution. Rates are derived from confusion
 * counts at load time (tpr = tp/(tp+fn), fpr = fp/(fp+tn)) rather than
 * hard-coded percentages.
 */
struct QuantProfile {
  std::string key;  // registry id, e.g. "BF16_video"
  Quant name = Quant::Custom;
  Modality modality = Modality::Video;
  double tpr = 0.0;
  double fpr = 0.0;
  double unknown_rate = 0.0;
  double mean_latency_s = 0.5;
  double latency_jitter_s = 0.05;  // uniform half-width; defaults to 10% of mean
  std::optional<ConfusionCounts> counts;

  void validate() const;  // throws ConfigError

  static QuantProfile from_counts(std::string key, Quant name, Modality modality,
                                  ConfusionCounts counts, double mean_latency_s,
                                  std::optional<double> jitter_s = std::nullopt,
                                  double unknown_rate = 0.0);
};

// Built-in profiles derived from the bundled quantization benchmarks:
// {BF16,INT8,NF4}_video, {NF4,INT8}_Verbose_static, INT8_Pruned_static,
// plus "oracle" (tpr=1, fpr=0, zero jitter) for tests.
const std::vector<QuantProfile>& builtin_profiles();
const QuantProfile& builtin_profile(std::string_view key);  // throws UnknownProfile

// Profile file schema:
// {"name","modality","tp","tn","fp","fn","unknown_rate","mean_latency_s",
//  "latency_jitter_s"}; rates may be given directly via "tpr"/"fpr" when no
// counts exist.
QuantProfile load_profile_file(const std::string& path);
std::string profile_to_json(const QuantProfile& profile);

// Resolves a --profile argument: builtin key or path to a profile file.
QuantProfile resolve_profile(const std::string& key_or_path);

struct BackendRequest {
  ingest::Window window;
  prompting::PromptSpec prompt;
  double deadline_s = 1.0;  // watchdog budget; enforced by the orchestrator
};

struct BackendResponse {
  std::string raw_text;
  std::int64_t tokens_generated = 0;
  double infer_s = 0.0;
  std::string backend_id;
  std::optional<std::string> profile;
};

// The single interface every implementation satisfies. Implementations must
// respect prompt.max_new_tokens; they may exceed deadline_s (the
// orchestrator's watchdog enforces the deadline, not the backend).
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse infer(const BackendRequest& req) = 0;
  virtual std::string id() const = 0;
  virtual std::optional<std::string> profile_key() const { return std::nullopt; }
};

/**
 * Replays recorded outputs verbatim, keyed by (clip_id, window_index).
 * Immutable after load; safe for concurrent infer calls.
 */
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::vector<log::PredictionRecord>& records);
  static ReplayBackend from_log_file(const std::string& path);

  BackendResponse infer(const BackendRequest& req) override;  // throws MissingRecord
  std::string id() const override { return "replay"; }

 private:
  struct Entry {
    std::string raw_text;
    std::int64_t tokens_generated;
    double infer_s;
    std::optional<std::string> profile;
  };
  std::map<std::pair<std::string, std::int64_t>, Entry> entries_;
};

/**
 * Simulates a quantization configuration. Draws are keyed by
 * (seed, clip_id, window_index), so outcomes are independent of evaluation
 * order and identical across parallel runs.
 */
class StochasticBackend : public Backend {
 public:
  StochasticBackend(QuantProfile profile, std::uint64_t seed);

  BackendResponse infer(const BackendRequest& req) override;  // throws MissingLabel
  std::string id() const override { return "stochastic:" + profile_.key; }
  std::optional<std::string> profile_key() const override { return profile_.key; }

  const QuantProfile& profile() const { return profile_; }

 private:
  QuantProfile profile_;
  std::uint64_t seed_;
};

// Free-function form of the stochastic model.
BackendResponse stochastic_infer(const BackendRequest& req, const QuantProfile& profile,
                                 std::uint64_t seed);

}  // namespace semobs::backend
