#include "semobs/orchestrator.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

#include "semobs/errors.hpp"
#include "semobs/hash.hpp"

namespace semobs::orch {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kTimeEps = 1e-9;

std::string explanation_of(const prompting::ParsedVerdict& v) {
  return v.think_text.value_or("");
}

}  // namespace

LatencyBreakdown account_latency(double sense_s, double preprocess_s, double infer_s,
                                 double post_s) {
  if (sense_s < 0) throw NegativeComponent("sense_s");
  if (preprocess_s < 0) throw NegativeComponent("preprocess_s");
  if (infer_s < 0) throw NegativeComponent("infer_s");
  if (post_s < 0) throw NegativeComponent("post_s");
  LatencyBreakdown b;
  b.sense_s = sense_s;
  b.preprocess_s = preprocess_s;
  b.infer_s = infer_s;
  b.post_s = post_s;
  b.total_s = ((sense_s + preprocess_s) + infer_s) + post_s;
  return b;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Nominal: return "NOMINAL";
    case Phase::Candidate: return "CANDIDATE";
    case Phase::Triggered: return "TRIGGERED";
    case Phase::HandoffAcked: return "HANDOFF_ACKED";
  }
  return "NOMINAL";
}

std::optional<HandoffEvent> step(DebounceState& state, const ObserverDecision& decision) {
  if (state.phase == Phase::Triggered || state.phase == Phase::HandoffAcked) {
    return std::nullopt;  // latched until reset
  }

  if (decision.z != 1) {
    state.consecutive_positives = 0;
    state.pending.clear();
    state.phase = Phase::Nominal;
    return std::nullopt;
  }

  state.consecutive_positives += 1;
  state.phase = Phase::Candidate;
  Contributor c;
  c.window_id = decision.window.id();
  c.explanation = decision.verdict ? explanation_of(*decision.verdict) : std::string{};
  c.latency = decision.latency;
  state.pending.push_back(std::move(c));

  if (state.consecutive_positives < state.n_min) return std::nullopt;

  HandoffEvent event;
  event.trigger_time_s = decision.decided_at_s;
  event.latency_of_last = decision.latency;
  for (const auto& contributor : state.pending) {
    event.window_ids.push_back(contributor.window_id);
    event.explanations.push_back(contributor.explanation);
  }
  state.pending.clear();
  state.phase = Phase::Triggered;
  return event;
}

void reset(DebounceState& state) {
  state.consecutive_positives = 0;
  state.pending.clear();
  state.phase = Phase::Nominal;
}

void acknowledge(DebounceState& state) {
  if (state.phase == Phase::Triggered) state.phase = Phase::HandoffAcked;
}

// ---- config ----------------------------------------------------------------

std::vector<std::string> ObserverConfig::validate() const {
  if (rate_hz <= 0) throw ConfigError("rate_hz must be positive");
  if (deadline_s <= 0) throw ConfigError("deadline_s must be positive");
  if (n_min < 1) throw ConfigError("n_min must be >= 1");
  if (sense_s < 0 || preprocess_s < 0 || post_s < 0) {
    throw ConfigError("latency components must be >= 0");
  }
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  sampling.validate();

  std::vector<std::string> warnings;
  const double period = 1.0 / rate_hz;
  if (deadline_s > period + kTimeEps) {
    warnings.push_back("deadline_s " + std::to_string(deadline_s) +
                       " exceeds the observer period " + std::to_string(period) +
                       "; cycles may overlap and stale windows will be dropped");
  }
  if (rate_hz < 1.0 || rate_hz > 2.0) {
    warnings.push_back("rate_hz " + std::to_string(rate_hz) +
                       " is outside the nominal 1-2 Hz observer band");
  }
  return warnings;
}

std::string ObserverConfig::to_json_string() const {
  ordered_json j;
  j["rate_hz"] = rate_hz;
  j["deadline_s"] = deadline_s;
  j["n_min"] = n_min;
  j["sampling"] = {{"k", sampling.k},
                   {"fps", sampling.fps},
                   {"window_duration_s", sampling.window_duration_s},
                   {"stride_s", sampling.stride_s}};
  j["prompt_tier"] = std::string(prompting::to_string(prompt_tier));
  j["prompt_context"] = prompt_context;
  j["backend"] = {{"kind", backend.kind},
                  {"profile", backend.profile},
                  {"path", backend.path},
                  {"endpoint", backend.endpoint}};
  j["clock"] = clock == ClockMode::Simulated ? "simulated" : "wallclock";
  j["seed"] = seed;
  j["sense_s"] = sense_s;
  j["preprocess_s"] = preprocess_s;
  j["post_s"] = post_s;
  j["max_retries"] = max_retries;
  j["rearm_after_handoff"] = rearm_after_handoff;
  return j.dump(2);
}

ObserverConfig ObserverConfig::from_json_string(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");

  ObserverConfig cfg;
  cfg.rate_hz = j.value("rate_hz", cfg.rate_hz);
  cfg.deadline_s = j.value("deadline_s", cfg.deadline_s);
  cfg.n_min = j.value("n_min", cfg.n_min);
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    cfg.sampling.k = s.value("k", cfg.sampling.k);
    cfg.sampling.fps = s.value("fps", cfg.sampling.fps);
    cfg.sampling.window_duration_s = s.value("window_duration_s", cfg.sampling.window_duration_s);
    cfg.sampling.stride_s = s.value("stride_s", cfg.sampling.stride_s);
  }
  if (j.contains("prompt_tier")) {
    auto tier = prompting::tier_from_string(j.at("prompt_tier").get<std::string>());
    if (!tier) throw ConfigError("unknown prompt_tier: " + j.at("prompt_tier").dump());
    cfg.prompt_tier = *tier;
  }
  if (j.contains("prompt_context")) {
    for (const auto& [k, v] : j.at("prompt_context").items()) {
      cfg.prompt_context[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    cfg.backend.kind = b.value("kind", cfg.backend.kind);
    cfg.backend.profile = b.value("profile", std::string{});
    cfg.backend.path = b.value("path", std::string{});
    cfg.backend.endpoint = b.value("endpoint", std::string{});
  }
  if (j.contains("clock")) {
    const std::string mode = j.at("clock").get<std::string>();
    if (mode == "simulated") {
      cfg.clock = ClockMode::Simulated;
    } else if (mode == "wallclock" || mode == "wall-clock") {
      cfg.clock = ClockMode::WallClock;
    } else {
      throw ConfigError("unknown clock mode: " + mode);
    }
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.sense_s = j.value("sense_s", cfg.sense_s);
  cfg.preprocess_s = j.value("preprocess_s", cfg.preprocess_s);
  cfg.post_s = j.value("post_s", cfg.post_s);
  cfg.max_retries = j.value("max_retries", cfg.max_retries);
  cfg.rearm_after_handoff = j.value("rearm_after_handoff", cfg.rearm_after_handoff);
  cfg.validate();
  return cfg;
}

ObserverConfig ObserverConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return from_json_string(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string ObserverConfig::hash() const { return sha256_hex(to_json_string()); }

// ---- observer loop ---------------------------------------------------------

namespace {

struct LoopContext {
  const ObserverConfig& cfg;
  backend::Backend& be;
  const prompting::PromptSpec& prompt;
  RunResult& result;
  DebounceState debounce;

  void start_clip() {
    // Streak positivity is a within-clip notion; windows of different clips
    // are not consecutive.
    reset(debounce);
  }

  void finish_decision(ObserverDecision d) {
    auto& stats = result.stats;
    stats.processed += 1;
    if (d.deadline_violated) stats.deadline_violations += 1;
    if (d.decision_class == DecisionClass::TimedOut) stats.timeouts += 1;
    if (d.budget_overshoot > 0) stats.budget_violations += 1;
    stats.mean_total_s += d.latency.total_s;  // running sum; divided at the end

    if (auto event = step(debounce, d)) {
      stats.handoffs += 1;
      result.handoffs.push_back(std::move(*event));
      if (cfg.rearm_after_handoff) reset(debounce);
    }
    result.decisions.push_back(std::move(d));
  }
};

ObserverDecision make_decision(const ingest::Window& window, const ObserverConfig& cfg,
                               const prompting::PromptSpec& prompt,
                               const backend::BackendResponse& resp, double started_at_s) {
  ObserverDecision d;
  d.window = WindowRef{window.clip_id, window.window_index, window.label, window.end_s};
  d.latency = account_latency(cfg.sense_s, cfg.preprocess_s, resp.infer_s, cfg.post_s);
  d.raw_text = resp.raw_text;
  d.tokens_generated = resp.tokens_generated;
  d.decided_at_s = started_at_s + d.latency.total_s;
  d.deadline_violated = d.latency.total_s > cfg.deadline_s;

  const auto budget = prompting::enforce_budget(prompt, resp.tokens_generated);
  d.budget_overshoot = budget.ok ? 0 : budget.overshoot;

  if (d.deadline_violated) {
    // Watchdog rule: the result arrives too late to act on, so it is
    // abandoned for triggering purposes even though the text is logged.
    d.decision_class = DecisionClass::TimedOut;
    d.z = 0;
    return d;
  }

  auto verdict = prompting::parse_output(resp.raw_text, prompt, resp.tokens_generated);
  const auto binary = prompting::to_decision(verdict);
  d.decision_class = binary.decision_class;
  d.z = binary.z;
  d.verdict = std::move(verdict);
  return d;
}

ObserverDecision make_timeout_decision(const ingest::Window& window, const ObserverConfig& cfg,
                                       double started_at_s, double elapsed_s,
                                       const std::string& raw_text) {
  ObserverDecision d;
  d.window = WindowRef{window.clip_id, window.window_index, window.label, window.end_s};
  d.latency = account_latency(cfg.sense_s, cfg.preprocess_s, elapsed_s, cfg.post_s);
  d.raw_text = raw_text;
  d.decided_at_s = started_at_s + d.latency.total_s;
  d.deadline_violated = true;
  d.decision_class = DecisionClass::TimedOut;
  d.z = 0;
  return d;
}

void run_simulated_clip(LoopContext& ctx, const std::vector<ingest::Window>& windows,
                        std::size_t begin, std::size_t end) {
  const auto& cfg = ctx.cfg;
  const double tick = 1.0 / cfg.rate_hz;
  ctx.start_clip();

  std::size_t next_due = begin;  // first window not yet due
  double now = 0.0;
  double idle_at = 0.0;
  double clip_clock_end = 0.0;

  for (std::int64_t n = 0; next_due < end; ++n) {
    now = static_cast<double>(n) * tick;
    if (now + kTimeEps < idle_at) continue;  // inference in flight

    // Collect everything that became due; keep only the newest.
    std::size_t latest = next_due;
    if (windows[latest].end_s > now + kTimeEps) continue;  // nothing due yet
    while (latest + 1 < end && windows[latest + 1].end_s <= now + kTimeEps) ++latest;
    ctx.result.stats.dropped += static_cast<std::int64_t>(latest - next_due);
    const ingest::Window& window = windows[latest];
    next_due = latest + 1;

    backend::BackendRequest req{window, ctx.prompt, cfg.deadline_s};
    std::optional<backend::BackendResponse> resp;
    int attempts = 0;
    while (true) {
      try {
        resp = ctx.be.infer(req);
        break;
      } catch (const BackendError& e) {
        if (!e.retryable) throw;
        ++attempts;
        ctx.result.stats.retries += 1;
        if (attempts > cfg.max_retries) break;
      }
    }

    ObserverDecision d =
        resp ? make_decision(window, cfg, ctx.prompt, *resp, now)
             // Retries exhausted: the cycle is lost, charge the full deadline.
             : make_timeout_decision(window, cfg, now, cfg.deadline_s, std::string{});
    idle_at = d.decided_at_s;
    clip_clock_end = std::max(clip_clock_end, d.decided_at_s);
    ctx.finish_decision(std::move(d));
  }
  ctx.result.stats.elapsed_s += std::max(clip_clock_end, now);
}

// One wall-clock backend call guarded by a watchdog. The call runs on its
// own thread; if the deadline passes first the slot is abandoned and the
// thread finishes against its own shared copy.
struct CallSlot {
  std::mutex m;
  std::condition_variable cv;
  bool done = false;
  std::optional<backend::BackendResponse> resp;
  std::exception_ptr error;
};

void run_wallclock_clip(LoopContext& ctx, const std::vector<ingest::Window>& windows,
                        std::size_t begin, std::size_t end) {
  using clock = std::chrono::steady_clock;
  const auto& cfg = ctx.cfg;
  ctx.start_clip();
  const auto run_start = clock::now();

  for (std::size_t i = begin; i < end; ++i) {
    const ingest::Window& window = windows[i];
    const auto call_start = clock::now();
    const auto deadline = call_start + std::chrono::duration_cast<clock::duration>(
                                           std::chrono::duration<double>(cfg.deadline_s));
    auto elapsed_s = [&] { return std::chrono::duration<double>(clock::now() - call_start).count(); };
    auto started_at_s = [&] {
      return std::chrono::duration<double>(call_start - run_start).count();
    };

    std::optional<backend::BackendResponse> resp;
    std::string failure;
    int attempts = 0;
    bool timed_out = false;

    while (!resp && !timed_out) {
      auto slot = std::make_shared<CallSlot>();
      backend::Backend* be = &ctx.be;
      backend::BackendRequest req{window, ctx.prompt, cfg.deadline_s};
      std::thread([slot, be, req = std::move(req)] {
        std::optional<backend::BackendResponse> r;
        std::exception_ptr err;
        try {
          r = be->infer(req);
        } catch (...) {
          err = std::current_exception();
        }
        std::lock_guard lock(slot->m);
        slot->resp = std::move(r);
        slot->error = err;
        slot->done = true;
        slot->cv.notify_all();
      }).detach();

      std::unique_lock lock(slot->m);
      if (!slot->cv.wait_until(lock, deadline, [&] { return slot->done; })) {
        timed_out = true;  // abandon; the detached thread owns the slot copy
        failure = "deadline passed before the backend returned";
        break;
      }
      if (slot->resp) {
        resp = std::move(slot->resp);
        break;
      }

      try {
        std::rethrow_exception(slot->error);
      } catch (const BackendError& e) {
        if (!e.retryable) throw;
        failure = e.what();
        ++attempts;
        ctx.result.stats.retries += 1;
        if (attempts > cfg.max_retries) {
          timed_out = true;
          break;
        }
        // Bounded backoff, capped at whatever deadline budget remains.
        const auto backoff = std::chrono::milliseconds(50L << std::min(attempts - 1, 4));
        const auto remaining = deadline - clock::now();
        if (remaining <= clock::duration::zero()) {
          timed_out = true;
          break;
        }
        std::this_thread::sleep_for(std::min<clock::duration>(backoff, remaining));
        if (clock::now() >= deadline) {
          timed_out = true;
          break;
        }
      }
    }

    ObserverDecision d;
    if (resp) {
      backend::BackendResponse measured = *resp;
      // The watchdog reasons about end-to-end time, so the wall-clock call
      // span (network included) is what lands in infer_s.
      measured.infer_s = elapsed_s();
      d = make_decision(window, cfg, ctx.prompt, measured, started_at_s());
    } else {
      d = make_timeout_decision(window, cfg, started_at_s(), elapsed_s(), std::string{});
      if (!failure.empty() && ctx.result.stats.warnings.size() < 16) {
        ctx.result.stats.warnings.push_back(window.id() + ": " + failure);
      }
    }
    ctx.finish_decision(std::move(d));
  }
  ctx.result.stats.elapsed_s = std::chrono::duration<double>(clock::now() - run_start).count();
}

}  // namespace

RunResult run_observer(const std::vector<ingest::Window>& windows, const ObserverConfig& cfg,
                       backend::Backend& be) {
  RunResult result;
  result.stats.warnings = cfg.validate();
  result.stats.windows_total = static_cast<std::int64_t>(windows.size());

  const prompting::PromptSpec prompt = prompting::build_prompt(cfg.prompt_tier, cfg.prompt_context);
  DebounceState debounce;
  debounce.n_min = cfg.n_min;
  LoopContext ctx{cfg, be, prompt, result, std::move(debounce)};

  std::size_t begin = 0;
  while (begin < windows.size()) {
    std::size_t end = begin + 1;
    while (end < windows.size() && windows[end].clip_id == windows[begin].clip_id) ++end;
    if (cfg.clock == ClockMode::Simulated) {
      run_simulated_clip(ctx, windows, begin, end);
    } else {
      run_wallclock_clip(ctx, windows, begin, end);
    }
    begin = end;
  }

  if (result.stats.processed > 0) {
    result.stats.mean_total_s /= static_cast<double>(result.stats.processed);
  }
  return result;
}

log::PredictionRecord to_record(const ObserverDecision& d, const std::string& prompt_hash,
                                const std::string& backend_id,
                                const std::optional<std::string>& profile) {
  log::PredictionRecord r;
  r.clip_id = d.window.clip_id;
  r.window_index = d.window.window_index;
  r.gt = d.window.label;
  r.decision = d.decision_class;
  r.z = d.z;
  r.raw_text = d.raw_text;
  r.tokens_generated = d.tokens_generated;
  r.sense_s = d.latency.sense_s;
  r.preprocess_s = d.latency.preprocess_s;
  r.infer_s = d.latency.infer_s;
  r.post_s = d.latency.post_s;
  r.total_s = d.latency.total_s;
  r.deadline_violated = d.deadline_violated;
  r.prompt_hash = prompt_hash;
  r.backend_id = backend_id;
  r.profile = profile;
  return r;
}

}  // namespace semobs::orch
