#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semobs/backend.hpp"
#include "semobs/metrics.hpp"
#include "semobs/orchestrator.hpp"
#include "semobs/rational.hpp"

namespace semobs::gate {

enum class Asil { A, B, C, D };

std::string_view to_string(Asil a);
std::optional<Asil> asil_from_string(std::string_view s);

enum class GoalKind {
  PrecisionMin,       // precision >= threshold
  RecallMin,          // recall >= threshold
  LatencyBudget,      // p95 <= threshold AND zero deadline violations
  ConfigProhibition,  // (quant, modality) must not match
};

std::string_view to_string(GoalKind k);

struct SafetyGoal {
  std::string id;
  std::string hazardous_event;
  Asil asil = Asil::B;
  GoalKind kind = GoalKind::PrecisionMin;
  Rational threshold{0, 1};  // ratio for metric goals, seconds for latency
  std::string mitigation;    // informational, carried into the report
  backend::Quant prohibited_quant = backend::Quant::NF4;
  backend::Modality prohibited_modality = backend::Modality::Video;
};

// The four default HARA goals: ASIL-B precision >= 80%, ASIL-D recall
// >= 90%, ASIL-B latency p95 <= 1 s with zero violations, and the ASIL-D
// prohibition of NF4 in the video path.
std::vector<SafetyGoal> default_goals();

std::vector<SafetyGoal> goals_from_json_string(const std::string& text);
std::vector<SafetyGoal> load_goals_file(const std::string& path);
std::string goals_to_json(std::span<const SafetyGoal> goals);

struct GoalVerdict {
  std::string goal_id;
  Asil asil = Asil::B;
  bool pass = false;
  std::optional<double> measured;  // percent for ratio goals, seconds for latency
  double threshold = 0.0;          // same unit as measured
  std::optional<double> gap_pp;    // shortfall (threshold - measured) when failing a ratio goal
  std::string note;
};

struct GateReport {
  std::vector<GoalVerdict> goals;
  bool pass = false;                  // all goals pass
  std::vector<std::string> blocking;  // failed ASIL-D goal ids
};

/**
 * Evaluates every goal against the report and config. Prohibitions are
 * checked first and fail on configuration alone; undefined metrics fail
 * their goal (a score we cannot compute cannot demonstrate safety).
 * Throws FingerprintMismatch when the report does not belong to the config.
 */
GateReport evaluate(const metrics::MetricsReport& report, const orch::ObserverConfig& config,
                    std::span<const SafetyGoal> goals);

std::string gate_report_to_json(const GateReport& report);

}  // namespace semobs::gate
