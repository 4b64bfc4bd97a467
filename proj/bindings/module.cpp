// Python bindings for the observer core: ingestion/windowing, prompt
// build/parse, backends, the observer loop, metric scoring and the safety
// gate, plus the CLI entry points for end-to-end runs.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semobs/backend.hpp"
#include "semobs/cli.hpp"
#include "semobs/errors.hpp"
#include "semobs/hash.hpp"
#include "semobs/ingest.hpp"
#include "semobs/metrics.hpp"
#include "semobs/orchestrator.hpp"
#include "semobs/prediction_log.hpp"
#include "semobs/prompting.hpp"
#include "semobs/rational.hpp"
#include "semobs/remote_backend.hpp"
#include "semobs/safety_gate.hpp"
#include "semobs/version.hpp"

namespace py = pybind11;
using namespace semobs;

PYBIND11_MODULE(_semobs, m) {
  m.doc() = "Semantic observer harness bindings";
  m.attr("__version__") = kVersion;

  // ---- common ----
  py::enum_<Label>(m, "Label").value("Normal", Label::Normal).value("Anomaly", Label::Anomaly);
  py::enum_<Answer>(m, "Answer")
      .value("Anomaly", Answer::Anomaly)
      .value("Normal", Answer::Normal)
      .value("Unknown", Answer::Unknown)
      .value("Unparseable", Answer::Unparseable);
  py::enum_<DecisionClass>(m, "DecisionClass")
      .value("Normal", DecisionClass::Normal)
      .value("Anomaly", DecisionClass::Anomaly)
      .value("Unknown", DecisionClass::Unknown)
      .value("Unparseable", DecisionClass::Unparseable)
      .value("TimedOut", DecisionClass::TimedOut);

  py::class_<Rational>(m, "Rational")
      .def_readonly("num", &Rational::num)
      .def_readonly("den", &Rational::den)
      .def("value", &Rational::value)
      .def("percent", &Rational::percent)
      .def("__repr__", [](const Rational& r) { return "Rational(" + r.str() + ")"; });

  m.def("sha256_hex", [](const std::string& s) { return sha256_hex(s); });

  // ---- ingest ----
  py::class_<ingest::Frame>(m, "Frame")
      .def(py::init<>())
      .def_readwrite("clip_id", &ingest::Frame::clip_id)
      .def_readwrite("frame_index", &ingest::Frame::frame_index)
      .def_readwrite("timestamp_s", &ingest::Frame::timestamp_s)
      .def_readwrite("uri", &ingest::Frame::uri)
      .def_readwrite("label", &ingest::Frame::label)
      .def_readwrite("ego_state", &ingest::Frame::ego_state);

  py::class_<ingest::SamplingConfig>(m, "SamplingConfig")
      .def(py::init<>())
      .def(py::init([](int k, double fps, double window_duration_s, double stride_s) {
             ingest::SamplingConfig cfg{k, fps, window_duration_s, stride_s};
             cfg.validate();
             return cfg;
           }),
           py::arg("k"), py::arg("fps"), py::arg("window_duration_s"), py::arg("stride_s"))
      .def_readwrite("k", &ingest::SamplingConfig::k)
      .def_readwrite("fps", &ingest::SamplingConfig::fps)
      .def_readwrite("window_duration_s", &ingest::SamplingConfig::window_duration_s)
      .def_readwrite("stride_s", &ingest::SamplingConfig::stride_s)
      .def("validate", &ingest::SamplingConfig::validate);

  py::class_<ingest::Window>(m, "Window")
      .def(py::init<>())
      .def_readwrite("clip_id", &ingest::Window::clip_id)
      .def_readwrite("window_index", &ingest::Window::window_index)
      .def_readwrite("frames", &ingest::Window::frames)
      .def_readwrite("start_s", &ingest::Window::start_s)
      .def_readwrite("end_s", &ingest::Window::end_s)
      .def_readwrite("label", &ingest::Window::label)
      .def("id", &ingest::Window::id);

  py::class_<ingest::Clip>(m, "Clip")
      .def(py::init<>())
      .def_readwrite("clip_id", &ingest::Clip::clip_id)
      .def_readwrite("frames", &ingest::Clip::frames);

  py::class_<ingest::SamplingWarning>(m, "SamplingWarning")
      .def_readonly("clip_id", &ingest::SamplingWarning::clip_id)
      .def_readonly("message", &ingest::SamplingWarning::message);

  m.def("load_manifest_file", &ingest::load_manifest_file, py::arg("path"));
  m.def("clip_duration_s", &ingest::clip_duration_s);
  m.def("window_count", &ingest::window_count, py::arg("clip_duration_s"), py::arg("cfg"));
  m.def(
      "sample_windows",
      [](const ingest::Clip& clip, const ingest::SamplingConfig& cfg) {
        std::vector<ingest::SamplingWarning> warnings;
        auto windows = ingest::sample_windows(clip, cfg, &warnings);
        return py::make_tuple(std::move(windows), std::move(warnings));
      },
      py::arg("clip"), py::arg("cfg"), "Returns (windows, warnings).");

  // ---- prompting ----
  py::enum_<prompting::PromptTier>(m, "PromptTier")
      .value("Verbose", prompting::PromptTier::Verbose)
      .value("Pruned", prompting::PromptTier::Pruned)
      .value("Minimal", prompting::PromptTier::Minimal);
  py::enum_<prompting::OutputFormat>(m, "OutputFormat")
      .value("BareWord", prompting::OutputFormat::BareWord)
      .value("XmlThinkAnswer", prompting::OutputFormat::XmlThinkAnswer);

  py::class_<prompting::PromptSpec>(m, "PromptSpec")
      .def(py::init<>())
      .def_readwrite("tier", &prompting::PromptSpec::tier)
      .def_readwrite("text", &prompting::PromptSpec::text)
      .def_readwrite("max_new_tokens", &prompting::PromptSpec::max_new_tokens)
      .def_readwrite("expected_format", &prompting::PromptSpec::expected_format)
      .def_readwrite("allowed_answers", &prompting::PromptSpec::allowed_answers)
      .def_readwrite("template_id", &prompting::PromptSpec::template_id)
      .def_readwrite("template_hash", &prompting::PromptSpec::template_hash);

  py::class_<prompting::ParsedVerdict>(m, "ParsedVerdict")
      .def_readonly("answer", &prompting::ParsedVerdict::answer)
      .def_readonly("violation", &prompting::ParsedVerdict::violation)
      .def_readonly("think_text", &prompting::ParsedVerdict::think_text)
      .def_readonly("tokens_generated", &prompting::ParsedVerdict::tokens_generated);

  py::class_<prompting::TemplateResource>(m, "TemplateResource")
      .def_readonly("id", &prompting::TemplateResource::id)
      .def_readonly("text", &prompting::TemplateResource::text)
      .def_readonly("hash", &prompting::TemplateResource::hash);

  m.def("template_for", &prompting::template_for, py::return_value_policy::reference);
  m.def("build_prompt", &prompting::build_prompt, py::arg("tier"),
        py::arg("context") = prompting::Context{});
  m.def("render_template", &prompting::render_template);
  m.def("parse_output", &prompting::parse_output, py::arg("raw"), py::arg("spec"),
        py::arg("tokens_generated") = 0);
  m.def("enforce_budget", [](const prompting::PromptSpec& spec, std::int64_t tokens) {
    const auto check = prompting::enforce_budget(spec, tokens);
    return py::make_tuple(check.ok, check.overshoot);
  });
  m.def("to_decision", [](const prompting::ParsedVerdict& v) {
    const auto d = prompting::to_decision(v);
    return py::make_tuple(d.z, d.decision_class);
  });

  // ---- backend ----
  py::enum_<backend::Quant>(m, "Quant")
      .value("BF16", backend::Quant::BF16)
      .value("INT8", backend::Quant::INT8)
      .value("NF4", backend::Quant::NF4)
      .value("Custom", backend::Quant::Custom);
  py::enum_<backend::Modality>(m, "Modality")
      .value("Static", backend::Modality::Static)
      .value("Video", backend::Modality::Video);

  py::class_<backend::ConfusionCounts>(m, "ConfusionCounts")
      .def(py::init<>())
      .def_readwrite("tp", &backend::ConfusionCounts::tp)
      .def_readwrite("tn", &backend::ConfusionCounts::tn)
      .def_readwrite("fp", &backend::ConfusionCounts::fp)
      .def_readwrite("fn", &backend::ConfusionCounts::fn);

  py::class_<backend::QuantProfile>(m, "QuantProfile")
      .def(py::init<>())
      .def_readwrite("key", &backend::QuantProfile::key)
      .def_readwrite("name", &backend::QuantProfile::name)
      .def_readwrite("modality", &backend::QuantProfile::modality)
      .def_readwrite("tpr", &backend::QuantProfile::tpr)
      .def_readwrite("fpr", &backend::QuantProfile::fpr)
      .def_readwrite("unknown_rate", &backend::QuantProfile::unknown_rate)
      .def_readwrite("mean_latency_s", &backend::QuantProfile::mean_latency_s)
      .def_readwrite("latency_jitter_s", &backend::QuantProfile::latency_jitter_s)
      .def("validate", &backend::QuantProfile::validate);

  m.def("builtin_profiles", &backend::builtin_profiles, py::return_value_policy::copy);
  m.def("builtin_profile", &backend::builtin_profile, py::return_value_policy::copy);
  m.def("resolve_profile", &backend::resolve_profile);
  m.def("load_profile_file", &backend::load_profile_file);

  py::class_<backend::BackendRequest>(m, "BackendRequest")
      .def(py::init<>())
      .def_readwrite("window", &backend::BackendRequest::window)
      .def_readwrite("prompt", &backend::BackendRequest::prompt)
      .def_readwrite("deadline_s", &backend::BackendRequest::deadline_s);

  py::class_<backend::BackendResponse>(m, "BackendResponse")
      .def_readonly("raw_text", &backend::BackendResponse::raw_text)
      .def_readonly("tokens_generated", &backend::BackendResponse::tokens_generated)
      .def_readonly("infer_s", &backend::BackendResponse::infer_s)
      .def_readonly("backend_id", &backend::BackendResponse::backend_id)
      .def_readonly("profile", &backend::BackendResponse::profile);

  py::class_<backend::Backend>(m, "Backend")
      .def("infer", &backend::Backend::infer)
      .def("id", &backend::Backend::id);

  py::class_<backend::ReplayBackend, backend::Backend>(m, "ReplayBackend")
      .def_static("from_log_file", &backend::ReplayBackend::from_log_file);

  py::class_<backend::StochasticBackend, backend::Backend>(m, "StochasticBackend")
      .def(py::init<backend::QuantProfile, std::uint64_t>(), py::arg("profile"), py::arg("seed"))
      .def("profile", &backend::StochasticBackend::profile, py::return_value_policy::copy);

  py::class_<backend::RemoteBackend, backend::Backend>(m, "RemoteBackend")
      .def(py::init<std::string, double>(), py::arg("endpoint"), py::arg("timeout_s"));

  m.def("stochastic_infer", &backend::stochastic_infer, py::arg("req"), py::arg("profile"),
        py::arg("seed"));

  // ---- orchestrator ----
  py::enum_<orch::Phase>(m, "Phase")
      .value("Nominal", orch::Phase::Nominal)
      .value("Candidate", orch::Phase::Candidate)
      .value("Triggered", orch::Phase::Triggered)
      .value("HandoffAcked", orch::Phase::HandoffAcked);
  py::enum_<orch::ClockMode>(m, "ClockMode")
      .value("Simulated", orch::ClockMode::Simulated)
      .value("WallClock", orch::ClockMode::WallClock);

  py::class_<orch::LatencyBreakdown>(m, "LatencyBreakdown")
      .def_readonly("sense_s", &orch::LatencyBreakdown::sense_s)
      .def_readonly("preprocess_s", &orch::LatencyBreakdown::preprocess_s)
      .def_readonly("infer_s", &orch::LatencyBreakdown::infer_s)
      .def_readonly("post_s", &orch::LatencyBreakdown::post_s)
      .def_readonly("total_s", &orch::LatencyBreakdown::total_s);
  m.def("account_latency", &orch::account_latency, py::arg("sense_s"), py::arg("preprocess_s"),
        py::arg("infer_s"), py::arg("post_s"));

  py::class_<orch::WindowRef>(m, "WindowRef")
      .def_readonly("clip_id", &orch::WindowRef::clip_id)
      .def_readonly("window_index", &orch::WindowRef::window_index)
      .def_readonly("label", &orch::WindowRef::label)
      .def_readonly("end_s", &orch::WindowRef::end_s)
      .def("id", &orch::WindowRef::id);

  py::class_<orch::ObserverDecision>(m, "ObserverDecision")
      .def(py::init<>())
      .def_readwrite("window", &orch::ObserverDecision::window)
      .def_readwrite("decision_class", &orch::ObserverDecision::decision_class)
      .def_readwrite("z", &orch::ObserverDecision::z)
      .def_readwrite("verdict", &orch::ObserverDecision::verdict)
      .def_readwrite("latency", &orch::ObserverDecision::latency)
      .def_readwrite("deadline_violated", &orch::ObserverDecision::deadline_violated)
      .def_readwrite("tokens_generated", &orch::ObserverDecision::tokens_generated)
      .def_readwrite("budget_overshoot", &orch::ObserverDecision::budget_overshoot)
      .def_readwrite("decided_at_s", &orch::ObserverDecision::decided_at_s)
      .def_readwrite("raw_text", &orch::ObserverDecision::raw_text);

  py::class_<orch::DebounceState>(m, "DebounceState")
      .def(py::init<>())
      .def(py::init([](int n_min) {
             orch::DebounceState s;
             s.n_min = n_min;
             return s;
           }),
           py::arg("n_min"))
      .def_readwrite("n_min", &orch::DebounceState::n_min)
      .def_readonly("consecutive_positives", &orch::DebounceState::consecutive_positives)
      .def_readonly("phase", &orch::DebounceState::phase);

  py::class_<orch::HandoffEvent>(m, "HandoffEvent")
      .def_readonly("trigger_time_s", &orch::HandoffEvent::trigger_time_s)
      .def_readonly("window_ids", &orch::HandoffEvent::window_ids)
      .def_readonly("explanations", &orch::HandoffEvent::explanations)
      .def_readonly("latency_of_last", &orch::HandoffEvent::latency_of_last);

  m.def("step", &orch::step, py::arg("state"), py::arg("decision"),
        "Advance the debounce machine; returns the HandoffEvent on trigger, else None.");
  m.def("reset", &orch::reset);
  m.def("acknowledge", &orch::acknowledge);

  py::class_<orch::BackendSelection>(m, "BackendSelection")
      .def(py::init<>())
      .def_readwrite("kind", &orch::BackendSelection::kind)
      .def_readwrite("profile", &orch::BackendSelection::profile)
      .def_readwrite("path", &orch::BackendSelection::path)
      .def_readwrite("endpoint", &orch::BackendSelection::endpoint);

  py::class_<orch::ObserverConfig>(m, "ObserverConfig")
      .def(py::init<>())
      .def_readwrite("rate_hz", &orch::ObserverConfig::rate_hz)
      .def_readwrite("deadline_s", &orch::ObserverConfig::deadline_s)
      .def_readwrite("n_min", &orch::ObserverConfig::n_min)
      .def_readwrite("sampling", &orch::ObserverConfig::sampling)
      .def_readwrite("prompt_tier", &orch::ObserverConfig::prompt_tier)
      .def_readwrite("prompt_context", &orch::ObserverConfig::prompt_context)
      .def_readwrite("backend", &orch::ObserverConfig::backend)
      .def_readwrite("clock", &orch::ObserverConfig::clock)
      .def_readwrite("seed", &orch::ObserverConfig::seed)
      .def_readwrite("sense_s", &orch::ObserverConfig::sense_s)
      .def_readwrite("preprocess_s", &orch::ObserverConfig::preprocess_s)
      .def_readwrite("post_s", &orch::ObserverConfig::post_s)
      .def_readwrite("max_retries", &orch::ObserverConfig::max_retries)
      .def_readwrite("rearm_after_handoff", &orch::ObserverConfig::rearm_after_handoff)
      .def("validate", &orch::ObserverConfig::validate)
      .def("to_json_string", &orch::ObserverConfig::to_json_string)
      .def_static("from_json_string", &orch::ObserverConfig::from_json_string)
      .def_static("load_file", &orch::ObserverConfig::load_file)
      .def("hash", &orch::ObserverConfig::hash);

  py::class_<orch::RunStats>(m, "RunStats")
      .def_readonly("windows_total", &orch::RunStats::windows_total)
      .def_readonly("processed", &orch::RunStats::processed)
      .def_readonly("dropped", &orch::RunStats::dropped)
      .def_readonly("timeouts", &orch::RunStats::timeouts)
      .def_readonly("deadline_violations", &orch::RunStats::deadline_violations)
      .def_readonly("budget_violations", &orch::RunStats::budget_violations)
      .def_readonly("handoffs", &orch::RunStats::handoffs)
      .def_readonly("retries", &orch::RunStats::retries)
      .def_readonly("mean_total_s", &orch::RunStats::mean_total_s)
      .def_readonly("elapsed_s", &orch::RunStats::elapsed_s)
      .def_readonly("warnings", &orch::RunStats::warnings);

  py::class_<orch::RunResult>(m, "RunResult")
      .def_readonly("decisions", &orch::RunResult::decisions)
      .def_readonly("handoffs", &orch::RunResult::handoffs)
      .def_readonly("stats", &orch::RunResult::stats);

  m.def("run_observer", &orch::run_observer, py::arg("windows"), py::arg("cfg"), py::arg("backend"),
        py::call_guard<py::gil_scoped_release>());
  m.def("to_record", &orch::to_record, py::arg("decision"), py::arg("prompt_hash"),
        py::arg("backend_id"), py::arg("profile") = std::optional<std::string>{});

  // ---- prediction log ----
  py::class_<log::PredictionRecord>(m, "PredictionRecord")
      .def(py::init<>())
      .def_readwrite("clip_id", &log::PredictionRecord::clip_id)
      .def_readwrite("window_index", &log::PredictionRecord::window_index)
      .def_readwrite("gt", &log::PredictionRecord::gt)
      .def_readwrite("decision", &log::PredictionRecord::decision)
      .def_readwrite("z", &log::PredictionRecord::z)
      .def_readwrite("raw_text", &log::PredictionRecord::raw_text)
      .def_readwrite("tokens_generated", &log::PredictionRecord::tokens_generated)
      .def_readwrite("sense_s", &log::PredictionRecord::sense_s)
      .def_readwrite("preprocess_s", &log::PredictionRecord::preprocess_s)
      .def_readwrite("infer_s", &log::PredictionRecord::infer_s)
      .def_readwrite("post_s", &log::PredictionRecord::post_s)
      .def_readwrite("total_s", &log::PredictionRecord::total_s)
      .def_readwrite("deadline_violated", &log::PredictionRecord::deadline_violated)
      .def_readwrite("prompt_hash", &log::PredictionRecord::prompt_hash)
      .def_readwrite("backend_id", &log::PredictionRecord::backend_id)
      .def_readwrite("profile", &log::PredictionRecord::profile);

  m.def("read_prediction_log", [](const std::string& path) {
    auto contents = log::read_prediction_log_file(path);
    return contents.records;
  });

  // ---- metrics ----
  py::class_<metrics::ConfusionMatrix>(m, "ConfusionMatrix")
      .def(py::init<>())
      .def(py::init([](std::int64_t tp, std::int64_t tn, std::int64_t fp, std::int64_t fn) {
             metrics::ConfusionMatrix m2;
             m2.tp = tp;
             m2.tn = tn;
             m2.fp = fp;
             m2.fn = fn;
             return m2;
           }),
           py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"))
      .def_readwrite("tp", &metrics::ConfusionMatrix::tp)
      .def_readwrite("tn", &metrics::ConfusionMatrix::tn)
      .def_readwrite("fp", &metrics::ConfusionMatrix::fp)
      .def_readwrite("fn", &metrics::ConfusionMatrix::fn)
      .def_readwrite("unknowns", &metrics::ConfusionMatrix::unknowns)
      .def_readwrite("unparseables", &metrics::ConfusionMatrix::unparseables)
      .def_readwrite("timeouts", &metrics::ConfusionMatrix::timeouts)
      .def("scored", &metrics::ConfusionMatrix::scored)
      .def("__add__",
           [](const metrics::ConfusionMatrix& a, const metrics::ConfusionMatrix& b) {
             return a + b;
           })
      .def("__eq__", [](const metrics::ConfusionMatrix& a, const metrics::ConfusionMatrix& b) {
        return a == b;
      });

  py::class_<metrics::Scores>(m, "Scores")
      .def_readonly("precision", &metrics::Scores::precision)
      .def_readonly("recall", &metrics::Scores::recall)
      .def_readonly("f1", &metrics::Scores::f1)
      .def_readonly("accuracy", &metrics::Scores::accuracy)
      .def_readonly("balanced_accuracy", &metrics::Scores::balanced_accuracy)
      .def_readonly("specificity", &metrics::Scores::specificity);

  py::class_<metrics::LatencyStats>(m, "LatencyStats")
      .def_readonly("mean_s", &metrics::LatencyStats::mean_s)
      .def_readonly("p50_s", &metrics::LatencyStats::p50_s)
      .def_readonly("p95_s", &metrics::LatencyStats::p95_s)
      .def_readonly("max_s", &metrics::LatencyStats::max_s)
      .def_readonly("violations", &metrics::LatencyStats::violations);

  py::class_<metrics::Fingerprint>(m, "Fingerprint")
      .def(py::init<>())
      .def_readwrite("prompt_hash", &metrics::Fingerprint::prompt_hash)
      .def_readwrite("backend_id", &metrics::Fingerprint::backend_id)
      .def_readwrite("profile", &metrics::Fingerprint::profile)
      .def_readwrite("n_min", &metrics::Fingerprint::n_min)
      .def_readwrite("deadline_s", &metrics::Fingerprint::deadline_s);

  py::class_<metrics::MetricsReport>(m, "MetricsReport")
      .def(py::init<>())
      .def_readwrite("matrix", &metrics::MetricsReport::matrix)
      .def_readwrite("scores", &metrics::MetricsReport::scores)
      .def_readwrite("latency", &metrics::MetricsReport::latency)
      .def_readwrite("fingerprint", &metrics::MetricsReport::fingerprint)
      .def_readwrite("deadline_s", &metrics::MetricsReport::deadline_s);

  py::enum_<metrics::ReportFormat>(m, "ReportFormat")
      .value("Json", metrics::ReportFormat::Json)
      .value("MarkdownTable", metrics::ReportFormat::MarkdownTable);

  m.def("score_log", [](const std::vector<log::PredictionRecord>& records) {
    return metrics::score_log(records);
  });
  m.def("compute_scores", &metrics::compute_scores);
  m.def(
      "latency_stats",
      [](const std::vector<log::PredictionRecord>& records, double deadline_s) {
        return metrics::latency_stats(records, deadline_s);
      },
      py::arg("records"), py::arg("deadline_s") = 1.0);
  m.def(
      "build_report",
      [](const std::vector<log::PredictionRecord>& records, double deadline_s,
         metrics::Fingerprint fp) { return metrics::build_report(records, deadline_s, fp); },
      py::arg("records"), py::arg("deadline_s") = 1.0,
      py::arg("fingerprint") = metrics::Fingerprint{});
  m.def("emit_report", &metrics::emit_report, py::arg("report"), py::arg("format"),
        py::arg("config_label") = "run");
  m.def("report_from_json_file", &metrics::report_from_json_file);

  // ---- safety gate ----
  py::enum_<gate::Asil>(m, "Asil")
      .value("A", gate::Asil::A)
      .value("B", gate::Asil::B)
      .value("C", gate::Asil::C)
      .value("D", gate::Asil::D);
  py::enum_<gate::GoalKind>(m, "GoalKind")
      .value("PrecisionMin", gate::GoalKind::PrecisionMin)
      .value("RecallMin", gate::GoalKind::RecallMin)
      .value("LatencyBudget", gate::GoalKind::LatencyBudget)
      .value("ConfigProhibition", gate::GoalKind::ConfigProhibition);

  py::class_<gate::SafetyGoal>(m, "SafetyGoal")
      .def(py::init<>())
      .def_readwrite("id", &gate::SafetyGoal::id)
      .def_readwrite("hazardous_event", &gate::SafetyGoal::hazardous_event)
      .def_readwrite("asil", &gate::SafetyGoal::asil)
      .def_readwrite("kind", &gate::SafetyGoal::kind)
      .def_readwrite("threshold", &gate::SafetyGoal::threshold)
      .def_readwrite("mitigation", &gate::SafetyGoal::mitigation);

  py::class_<gate::GoalVerdict>(m, "GoalVerdict")
      .def_readonly("goal_id", &gate::GoalVerdict::goal_id)
      .def_readonly("asil", &gate::GoalVerdict::asil)
      .def_readonly("pass_", &gate::GoalVerdict::pass)
      .def_readonly("measured", &gate::GoalVerdict::measured)
      .def_readonly("threshold", &gate::GoalVerdict::threshold)
      .def_readonly("gap_pp", &gate::GoalVerdict::gap_pp)
      .def_readonly("note", &gate::GoalVerdict::note);

  py::class_<gate::GateReport>(m, "GateReport")
      .def_readonly("goals", &gate::GateReport::goals)
      .def_readonly("pass_", &gate::GateReport::pass)
      .def_readonly("blocking", &gate::GateReport::blocking);

  m.def("default_goals", &gate::default_goals);
  m.def("load_goals_file", &gate::load_goals_file);
  m.def("evaluate_gate", [](const metrics::MetricsReport& report,
                            const orch::ObserverConfig& config,
                            const std::vector<gate::SafetyGoal>& goals) {
    return gate::evaluate(report, config, goals);
  });
  m.def("gate_report_to_json", &gate::gate_report_to_json);

  // ---- CLI entry points ----
  auto cli_mod = m.def_submodule("cli", "End-to-end commands used by the semobs binary");
  cli_mod.def(
      "simulate",
      [](const std::string& config, const std::string& manifest, const std::string& out,
         std::optional<std::string> profile, std::optional<std::uint64_t> seed) {
        cli::RunManifest run;
        run.config_path = config;
        run.manifest_path = manifest;
        run.out_dir = out;
        run.profile = std::move(profile);
        run.seed = seed;
        return cli::cmd_simulate(run);
      },
      py::arg("config"), py::arg("manifest"), py::arg("out"), py::arg("profile") = std::nullopt,
      py::arg("seed") = std::nullopt);
  cli_mod.def(
      "evaluate",
      [](const std::string& log_path, const std::string& out, std::optional<double> deadline_s,
         int shards) {
        cli::EvaluateArgs args;
        args.log_path = log_path;
        args.out_dir = out;
        args.deadline_s = deadline_s;
        args.shards = shards;
        return cli::cmd_evaluate(args);
      },
      py::arg("log"), py::arg("out"), py::arg("deadline_s") = std::nullopt,
      py::arg("shards") = 1);
  cli_mod.def(
      "gate",
      [](const std::string& report, const std::string& config, std::optional<std::string> goals,
         std::optional<std::string> out) {
        cli::GateArgs args;
        args.report_path = report;
        args.config_path = config;
        args.goals_path = std::move(goals);
        args.out_path = std::move(out);
        return cli::cmd_gate(args);
      },
      py::arg("report"), py::arg("config"), py::arg("goals") = std::nullopt,
      py::arg("out") = std::nullopt);

  // Typed exceptions worth distinguishing in python. Translators run in
  // reverse registration order, so the base goes first and acts as the
  // fallback for everything the specific ones do not claim.
  py::register_exception<Error>(m, "SemobsError");
  py::register_exception<MissingRecord>(m, "MissingRecordError");
  py::register_exception<MissingLabel>(m, "MissingLabelError");
  py::register_exception<MissingGroundTruth>(m, "MissingGroundTruthError");
  py::register_exception<EmptyLog>(m, "EmptyLogError");
  py::register_exception<FingerprintMismatch>(m, "FingerprintMismatchError");
  py::register_exception<ConfigError>(m, "ConfigurationError");
}
