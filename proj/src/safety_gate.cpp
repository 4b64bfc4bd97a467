#include "semobs/safety_gate.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "semobs/errors.hpp"
#include "semobs/prompting.hpp"

namespace semobs::gate {

namespace {

using ordered_json = nlohmann::ordered_json;

Rational threshold_from_json(const ordered_json& j) {
  if (j.is_string()) return rational_from_decimal(j.get<std::string>());
  if (j.is_number()) return rational_from_double(j.get<double>());
  throw ConfigError("goal threshold must be a number or decimal string");
}

// The deployed configuration's (quant, modality), when it declares one.
std::optional<std::pair<backend::Quant, backend::Modality>> config_quant(
    const orch::ObserverConfig& config, const metrics::MetricsReport& report) {
  std::string key = config.backend.profile;
  if (key.empty() && report.fingerprint.profile) key = *report.fingerprint.profile;
  if (key.empty()) return std::nullopt;
  try {
    const backend::QuantProfile profile = backend::resolve_profile(key);
    return std::make_pair(profile.name, profile.modality);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void check_fingerprint(const metrics::MetricsReport& report, const orch::ObserverConfig& config) {
  const auto& fp = report.fingerprint;
  if (!fp.prompt_hash.empty()) {
    const auto& tier_hash = prompting::template_for(config.prompt_tier).hash;
    if (fp.prompt_hash != tier_hash) {
      throw FingerprintMismatch("prompt hash " + fp.prompt_hash + " != config tier hash " +
                                tier_hash);
    }
  }
  if (fp.profile && !config.backend.profile.empty()) {
    // Config may name a profile file; compare resolved keys.
    std::string config_key = config.backend.profile;
    try {
      config_key = backend::resolve_profile(config.backend.profile).key;
    } catch (const Error&) {
    }
    if (*fp.profile != config_key) {
      throw FingerprintMismatch("profile " + *fp.profile + " != config profile " + config_key);
    }
  }
  if (fp.n_min != config.n_min) {
    throw FingerprintMismatch("n_min " + std::to_string(fp.n_min) + " != config n_min " +
                              std::to_string(config.n_min));
  }
  if (std::abs(fp.deadline_s - config.deadline_s) > 1e-9) {
    throw FingerprintMismatch("deadline_s " + std::to_string(fp.deadline_s) +
                              " != config deadline_s " + std::to_string(config.deadline_s));
  }
}

GoalVerdict ratio_goal_verdict(const SafetyGoal& goal, const MaybeRatio& measured) {
  GoalVerdict v;
  v.goal_id = goal.id;
  v.asil = goal.asil;
  v.threshold = goal.threshold.percent();
  if (!measured) {
    v.pass = false;
    v.note = "metric undefined (0/0); undefined metrics fail conservatively";
    return v;
  }
  v.measured = measured->percent();
  v.pass = *measured >= goal.threshold;  // exact rational comparison
  if (!v.pass) {
    v.gap_pp = (goal.threshold - *measured).percent();
    v.note = "short of target by " + std::to_string(*v.gap_pp) + " pp";
  }
  return v;
}

}  // namespace

std::string_view to_string(Asil a) {
  switch (a) {
    case Asil::A: return "A";
    case Asil::B: return "B";
    case Asil::C: return "C";
    case Asil::D: return "D";
  }
  return "B";
}

std::optional<Asil> asil_from_string(std::string_view s) {
  if (s == "A") return Asil::A;
  if (s == "B") return Asil::B;
  if (s == "C") return Asil::C;
  if (s == "D") return Asil::D;
  return std::nullopt;
}

std::string_view to_string(GoalKind k) {
  switch (k) {
    case GoalKind::PrecisionMin: return "precision_min";
    case GoalKind::RecallMin: return "recall_min";
    case GoalKind::LatencyBudget: return "latency_budget";
    case GoalKind::ConfigProhibition: return "config_prohibition";
  }
  return "precision_min";
}

std::vector<SafetyGoal> default_goals() {
  std::vector<SafetyGoal> goals;

  SafetyGoal precision;
  precision.id = "SG1_precision";
  precision.hazardous_event = "False positive: spurious fail-safe trigger";
  precision.asil = Asil::B;
  precision.kind = GoalKind::PrecisionMin;
  precision.threshold = Rational::of(80, 100);
  precision.mitigation = "debounce triggers";
  goals.push_back(precision);

  SafetyGoal recall;
  recall.id = "SG2_recall";
  recall.hazardous_event = "False negative: undetected hazard";
  recall.asil = Asil::D;
  recall.kind = GoalKind::RecallMin;
  recall.threshold = Rational::of(90, 100);
  recall.mitigation = "redundant detection";
  goals.push_back(recall);

  SafetyGoal latency;
  latency.id = "SG3_latency";
  latency.hazardous_event = "Excessive latency";
  latency.asil = Asil::B;
  latency.kind = GoalKind::LatencyBudget;
  latency.threshold = Rational::of(1, 1);
  latency.mitigation = "watchdog monitor";
  goals.push_back(latency);

  SafetyGoal prohibition;
  prohibition.id = "SG4_no_nf4_video";
  prohibition.hazardous_event = "NF4 silent recall collapse (video)";
  prohibition.asil = Asil::D;
  prohibition.kind = GoalKind::ConfigProhibition;
  prohibition.threshold = Rational::of(0, 1);
  prohibition.mitigation = "prohibit NF4 in video path";
  prohibition.prohibited_quant = backend::Quant::NF4;
  prohibition.prohibited_modality = backend::Modality::Video;
  goals.push_back(prohibition);

  return goals;
}

std::vector<SafetyGoal> goals_from_json_string(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) throw ConfigError("goals file must be a JSON array");

  std::vector<SafetyGoal> goals;
  for (const auto& g : j) {
    SafetyGoal goal;
    goal.id = g.at("id").get<std::string>();
    goal.hazardous_event = g.value("hazardous_event", std::string{});
    const auto asil = asil_from_string(g.value("asil", std::string{"B"}));
    if (!asil) throw ConfigError("goal " + goal.id + ": unknown ASIL");
    goal.asil = *asil;
    const std::string kind = g.at("kind").get<std::string>();
    if (kind == "precision_min") {
      goal.kind = GoalKind::PrecisionMin;
    } else if (kind == "recall_min") {
      goal.kind = GoalKind::RecallMin;
    } else if (kind == "latency_budget") {
      goal.kind = GoalKind::LatencyBudget;
    } else if (kind == "config_prohibition") {
      goal.kind = GoalKind::ConfigProhibition;
    } else {
      throw ConfigError("goal " + goal.id + ": unknown kind " + kind);
    }
    if (g.contains("threshold")) goal.threshold = threshold_from_json(g.at("threshold"));
    goal.mitigation = g.value("mitigation", std::string{});
    if (goal.kind == GoalKind::ConfigProhibition) {
      const auto quant = backend::quant_from_string(g.value("prohibited_quant", std::string{"NF4"}));
      const auto modality =
          backend::modality_from_string(g.value("prohibited_modality", std::string{"video"}));
      if (!quant || !modality) throw ConfigError("goal " + goal.id + ": bad prohibition target");
      goal.prohibited_quant = *quant;
      goal.prohibited_modality = *modality;
    }
    goals.push_back(std::move(goal));
  }
  return goals;
}

std::vector<SafetyGoal> load_goals_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open goals file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return goals_from_json_string(text);
}

std::string goals_to_json(std::span<const SafetyGoal> goals) {
  ordered_json arr = ordered_json::array();
  for (const auto& g : goals) {
    ordered_json j;
    j["id"] = g.id;
    j["hazardous_event"] = g.hazardous_event;
    j["asil"] = std::string(to_string(g.asil));
    j["kind"] = std::string(to_string(g.kind));
    j["threshold"] = g.threshold.value();
    j["mitigation"] = g.mitigation;
    if (g.kind == GoalKind::ConfigProhibition) {
      j["prohibited_quant"] = std::string(backend::to_string(g.prohibited_quant));
      j["prohibited_modality"] = std::string(backend::to_string(g.prohibited_modality));
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

GateReport evaluate(const metrics::MetricsReport& report, const orch::ObserverConfig& config,
                    std::span<const SafetyGoal> goals) {
  check_fingerprint(report, config);

  GateReport out;
  const auto quant = config_quant(config, report);

  // Prohibitions first: they fail on configuration alone, independent of
  // any measured value.
  for (const auto& goal : goals) {
    if (goal.kind != GoalKind::ConfigProhibition) continue;
    GoalVerdict v;
    v.goal_id = goal.id;
    v.asil = goal.asil;
    v.threshold = 0.0;
    const bool prohibited = quant && quant->first == goal.prohibited_quant &&
                            quant->second == goal.prohibited_modality;
    v.pass = !prohibited;
    if (prohibited) {
      v.note = std::string("configuration uses ") +
               std::string(backend::to_string(goal.prohibited_quant)) + " in the " +
               std::string(backend::to_string(goal.prohibited_modality)) +
               " path, which is prohibited regardless of measured metrics";
    }
    out.goals.push_back(std::move(v));
  }

  for (const auto& goal : goals) {
    switch (goal.kind) {
      case GoalKind::PrecisionMin:
        out.goals.push_back(ratio_goal_verdict(goal, report.scores.precision));
        break;
      case GoalKind::RecallMin:
        out.goals.push_back(ratio_goal_verdict(goal, report.scores.recall));
        break;
      case GoalKind::LatencyBudget: {
        GoalVerdict v;
        v.goal_id = goal.id;
        v.asil = goal.asil;
        v.threshold = goal.threshold.value();
        v.measured = report.latency.p95_s;
        const bool p95_ok = report.latency.p95_s <= goal.threshold.value();
        const bool no_violations = report.latency.violations == 0;
        v.pass = p95_ok && no_violations;
        v.note = "p95 " + std::to_string(report.latency.p95_s) + " s, " +
                 std::to_string(report.latency.violations) +
                 " deadline violations (goal: p95 within budget and zero violations)";
        out.goals.push_back(std::move(v));
        break;
      }
      case GoalKind::ConfigProhibition:
        break;  // already evaluated
    }
  }

  out.pass = true;
  for (const auto& v : out.goals) {
    if (v.pass) continue;
    out.pass = false;
    if (v.asil == Asil::D) out.blocking.push_back(v.goal_id);
  }
  return out;
}

std::string gate_report_to_json(const GateReport& report) {
  ordered_json j;
  j["overall"] = report.pass ? "PASS" : "FAIL";
  j["blocking"] = report.blocking;
  ordered_json arr = ordered_json::array();
  for (const auto& v : report.goals) {
    ordered_json g;
    g["goal_id"] = v.goal_id;
    g["asil"] = std::string(to_string(v.asil));
    g["pass"] = v.pass;
    g["measured"] = v.measured ? ordered_json(*v.measured) : ordered_json(nullptr);
    g["threshold"] = v.threshold;
    g["gap_pp"] = v.gap_pp ? ordered_json(*v.gap_pp) : ordered_json(nullptr);
    g["note"] = v.note;
    arr.push_back(std::move(g));
  }
  j["goals"] = std::move(arr);
  return j.dump(2) + "\n";
}

}  // namespace semobs::gate
