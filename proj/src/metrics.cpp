#include "semobs/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "semobs/errors.hpp"

namespace semobs::metrics {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json ratio_to_json(const MaybeRatio& r) {
  if (!r) return nullptr;
  ordered_json j;
  j["num"] = r->num;
  j["den"] = r->den;
  j["value"] = r->value();
  j["percent"] = r->percent();
  return j;
}

MaybeRatio ratio_from_json(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return Rational::of(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
}

std::string fmt_pct(const MaybeRatio& r) {
  if (!r) return "n/a";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << r->percent() << "%";
  return os.str();
}

std::string fmt_s(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  unknowns += o.unknowns;
  unparseables += o.unparseables;
  timeouts += o.timeouts;
  return *this;
}

ConfusionMatrix score_log(std::span<const log::PredictionRecord> records) {
  ConfusionMatrix m;
  for (const auto& r : records) {
    if (!r.gt) throw MissingGroundTruth(r.clip_id, r.window_index);
    switch (r.decision) {
      case DecisionClass::Unknown: m.unknowns += 1; break;
      case DecisionClass::Unparseable: m.unparseables += 1; break;
      case DecisionClass::TimedOut: m.timeouts += 1; break;
      default: break;
    }
    const bool positive_gt = *r.gt == Label::Anomaly;
    const bool positive_decision = r.decision == DecisionClass::Anomaly;
    if (positive_gt) {
      positive_decision ? ++m.tp : ++m.fn;
    } else {
      positive_decision ? ++m.fp : ++m.tn;
    }
  }
  return m;
}

Scores compute_scores(const ConfusionMatrix& m) {
  Scores s;
  s.precision = ratio_or_undefined(m.tp, m.tp + m.fp);
  s.recall = ratio_or_undefined(m.tp, m.tp + m.fn);
  s.f1 = ratio_or_undefined(2 * m.tp, 2 * m.tp + m.fp + m.fn);
  s.accuracy = ratio_or_undefined(m.tp + m.tn, m.scored());
  s.specificity = ratio_or_undefined(m.tn, m.tn + m.fp);
  if (s.recall && s.specificity) {
    s.balanced_accuracy = (*s.recall + *s.specificity) * Rational::of(1, 2);
  }
  return s;
}

LatencyStats latency_stats(std::span<const log::PredictionRecord> records, double deadline_s) {
  if (records.empty()) throw EmptyLog();
  std::vector<double> totals;
  totals.reserve(records.size());
  LatencyStats stats;
  double sum = 0.0;
  for (const auto& r : records) {
    totals.push_back(r.total_s);
    sum += r.total_s;
    if (r.total_s > deadline_s) stats.violations += 1;
  }
  std::sort(totals.begin(), totals.end());

  // Nearest-rank percentile: value at ceil(p/100 * N), 1-indexed.
  auto nearest_rank = [&](double p) {
    const auto n = static_cast<double>(totals.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, totals.size());
    return totals[rank - 1];
  };
  stats.mean_s = sum / static_cast<double>(totals.size());
  stats.p50_s = nearest_rank(50.0);
  stats.p95_s = nearest_rank(95.0);
  stats.max_s = totals.back();
  return stats;
}

MetricsReport build_report(std::span<const log::PredictionRecord> records, double deadline_s,
                           Fingerprint fingerprint) {
  MetricsReport report;
  report.matrix = score_log(records);
  report.scores = compute_scores(report.matrix);
  report.latency = latency_stats(records, deadline_s);
  report.fingerprint = std::move(fingerprint);
  report.deadline_s = deadline_s;
  return report;
}

std::string emit_report(const MetricsReport& report, ReportFormat format,
                        const std::string& config_label) {
  if (format == ReportFormat::Json) {
    ordered_json j;
    j["config"] = config_label;
    j["matrix"] = {{"tp", report.matrix.tp},
                   {"tn", report.matrix.tn},
                   {"fp", report.matrix.fp},
                   {"fn", report.matrix.fn},
                   {"unknowns", report.matrix.unknowns},
                   {"unparseables", report.matrix.unparseables},
                   {"timeouts", report.matrix.timeouts},
                   {"scored", report.matrix.scored()}};
    j["scores"] = {{"precision", ratio_to_json(report.scores.precision)},
                   {"recall", ratio_to_json(report.scores.recall)},
                   {"f1", ratio_to_json(report.scores.f1)},
                   {"accuracy", ratio_to_json(report.scores.accuracy)},
                   {"balanced_accuracy", ratio_to_json(report.scores.balanced_accuracy)},
                   {"specificity", ratio_to_json(report.scores.specificity)}};
    j["latency"] = {{"mean_s", report.latency.mean_s},
                    {"p50_s", report.latency.p50_s},
                    {"p95_s", report.latency.p95_s},
                    {"max_s", report.latency.max_s},
                    {"violations", report.latency.violations}};
    j["deadline_s"] = report.deadline_s;
    j["fingerprint"] = {
        {"prompt_hash", report.fingerprint.prompt_hash},
        {"backend_id", report.fingerprint.backend_id},
        {"profile", report.fingerprint.profile ? ordered_json(*report.fingerprint.profile)
                                               : ordered_json(nullptr)},
        {"n_min", report.fingerprint.n_min},
        {"deadline_s", report.fingerprint.deadline_s}};
    return j.dump(2) + "\n";
  }

  std::ostringstream os;
  os << "| Config | TP | TN | FP | FN | Precision | Recall | F1 | Acc. | Bal. Acc. | "
        "Latency p50/p95 (s) | Violations |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  os << "| " << config_label << " | " << report.matrix.tp << " | " << report.matrix.tn << " | "
     << report.matrix.fp << " | " << report.matrix.fn << " | " << fmt_pct(report.scores.precision)
     << " | " << fmt_pct(report.scores.recall) << " | " << fmt_pct(report.scores.f1) << " | "
     << fmt_pct(report.scores.accuracy) << " | " << fmt_pct(report.scores.balanced_accuracy)
     << " | " << fmt_s(report.latency.p50_s) << " / " << fmt_s(report.latency.p95_s) << " | "
     << report.latency.violations << " |\n";
  if (report.matrix.unknowns + report.matrix.unparseables + report.matrix.timeouts > 0) {
    os << "\nUnscored side counts: " << report.matrix.unknowns << " unknown, "
       << report.matrix.unparseables << " unparseable, " << report.matrix.timeouts
       << " timed out.\n";
  }
  return os.str();
}

MetricsReport report_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path);
  ordered_json j = ordered_json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("report is not a JSON object: " + path);

  MetricsReport report;
  try {
    const auto& m = j.at("matrix");
    report.matrix.tp = m.at("tp").get<std::int64_t>();
    report.matrix.tn = m.at("tn").get<std::int64_t>();
    report.matrix.fp = m.at("fp").get<std::int64_t>();
    report.matrix.fn = m.at("fn").get<std::int64_t>();
    report.matrix.unknowns = m.value("unknowns", std::int64_t{0});
    report.matrix.unparseables = m.value("unparseables", std::int64_t{0});
    report.matrix.timeouts = m.value("timeouts", std::int64_t{0});
    const auto& s = j.at("scores");
    report.scores.precision = ratio_from_json(s.at("precision"));
    report.scores.recall = ratio_from_json(s.at("recall"));
    report.scores.f1 = ratio_from_json(s.at("f1"));
    report.scores.accuracy = ratio_from_json(s.at("accuracy"));
    report.scores.balanced_accuracy = ratio_from_json(s.at("balanced_accuracy"));
    report.scores.specificity = ratio_from_json(s.at("specificity"));
    const auto& l = j.at("latency");
    report.latency.mean_s = l.at("mean_s").get<double>();
    report.latency.p50_s = l.at("p50_s").get<double>();
    report.latency.p95_s = l.at("p95_s").get<double>();
    report.latency.max_s = l.at("max_s").get<double>();
    report.latency.violations = l.at("violations").get<std::int64_t>();
    report.deadline_s = j.value("deadline_s", 1.0);
    const auto& f = j.at("fingerprint");
    report.fingerprint.prompt_hash = f.value("prompt_hash", std::string{});
    report.fingerprint.backend_id = f.value("backend_id", std::string{});
    if (f.contains("profile") && !f.at("profile").is_null()) {
      report.fingerprint.profile = f.at("profile").get<std::string>();
    }
    report.fingerprint.n_min = f.value("n_min", 2);
    report.fingerprint.deadline_s = f.value("deadline_s", 1.0);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("report schema violation: ") + e.what());
  }
  return report;
}

std::vector<log::PredictionRecord> synthesize_records(const ConfusionMatrix& matrix,
                                                      const SynthesisOptions& opts) {
  // Side-counter decisions score as TN on normal gt and FN on anomalous gt,
  // so they consume capacity from those cells. Fill TN capacity first, then
  // FN; anything beyond tn + fn cannot be realized.
  const std::int64_t side = matrix.unknowns + matrix.unparseables + matrix.timeouts;
  if (side > matrix.tn + matrix.fn) {
    throw ConfigError("side counters exceed tn + fn capacity; matrix is not realizable");
  }

  struct Cell {
    Label gt;
    DecisionClass decision;
    std::int64_t count;
  };
  std::vector<Cell> cells;
  cells.push_back({Label::Anomaly, DecisionClass::Anomaly, matrix.tp});
  cells.push_back({Label::Normal, DecisionClass::Anomaly, matrix.fp});

  std::int64_t tn_budget = matrix.tn;
  std::int64_t fn_budget = matrix.fn;
  auto place_side = [&](DecisionClass decision, std::int64_t count) {
    const std::int64_t on_tn = std::min(count, tn_budget);
    tn_budget -= on_tn;
    const std::int64_t on_fn = count - on_tn;
    fn_budget -= on_fn;
    if (on_tn > 0) cells.push_back({Label::Normal, decision, on_tn});
    if (on_fn > 0) cells.push_back({Label::Anomaly, decision, on_fn});
  };
  place_side(DecisionClass::Unknown, matrix.unknowns);
  place_side(DecisionClass::Unparseable, matrix.unparseables);
  place_side(DecisionClass::TimedOut, matrix.timeouts);
  cells.push_back({Label::Normal, DecisionClass::Normal, tn_budget});
  cells.push_back({Label::Anomaly, DecisionClass::Normal, fn_budget});

  std::vector<std::pair<Label, DecisionClass>> outcomes;
  for (const auto& cell : cells) {
    for (std::int64_t i = 0; i < cell.count; ++i) outcomes.emplace_back(cell.gt, cell.decision);
  }
  std::mt19937_64 rng(opts.shuffle_seed);
  std::shuffle(outcomes.begin(), outcomes.end(), rng);

  std::vector<log::PredictionRecord> records;
  records.reserve(outcomes.size());
  std::int64_t index = 0;
  for (const auto& [gt, decision] : outcomes) {
    log::PredictionRecord r;
    std::ostringstream clip;
    clip << opts.clip_prefix << "_" << std::setw(5) << std::setfill('0') << index;
    r.clip_id = clip.str();
    r.window_index = 0;
    r.gt = gt;
    r.decision = decision;
    r.z = decision == DecisionClass::Anomaly ? 1 : 0;
    switch (decision) {
      case DecisionClass::Anomaly:
        r.raw_text = opts.xml_format ? "<think>hazard indicators in the drivable region</think>\n"
                                       "<answer>Anomaly</answer>"
                                     : "Anomaly";
        break;
      case DecisionClass::Normal:
        r.raw_text = opts.xml_format ? "<think>scene consistent with nominal driving</think>\n"
                                       "<answer>Normal</answer>"
                                     : "Normal";
        break;
      case DecisionClass::Unknown:
        r.raw_text = opts.xml_format ? "<think>insufficient evidence to commit</think>\n"
                                       "<answer>Unknown</answer>"
                                     : "Unknown";
        break;
      case DecisionClass::Unparseable:
        r.raw_text = "The scene looks fine overall.";
        break;
      case DecisionClass::TimedOut:
        r.raw_text = "";
        break;
    }
    r.tokens_generated = static_cast<std::int64_t>(opts.xml_format ? 8 : 1);
    const double infer =
        decision == DecisionClass::TimedOut ? 1.5 * opts.deadline_s : opts.infer_s;
    r.infer_s = infer;
    r.total_s = infer;
    r.deadline_violated = r.total_s > opts.deadline_s;
    r.prompt_hash = opts.prompt_hash;
    r.backend_id = opts.backend_id;
    r.profile = opts.profile;
    records.push_back(std::move(r));
    ++index;
  }
  return records;
}

}  // namespace semobs::metrics
