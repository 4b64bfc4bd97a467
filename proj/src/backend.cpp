#include "semobs/backend.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "semobs/errors.hpp"

namespace semobs::backend {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0,1) from the top 53 bits; identical across platforms, unlike
// std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t count_tokens(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string word;
  std::int64_t n = 0;
  while (in >> word) ++n;
  return n;
}

std::string truncate_tokens(std::string_view text, std::int64_t max_tokens) {
  std::istringstream in{std::string(text)};
  std::string word, out;
  std::int64_t n = 0;
  while (n < max_tokens && in >> word) {
    if (n > 0) out += ' ';
    out += word;
    ++n;
  }
  return out;
}

Quant quant_or_throw(const std::string& s) {
  auto q = quant_from_string(s);
  if (!q) throw ConfigError("unknown quantization name: " + s);
  return *q;
}

Modality modality_or_throw(const std::string& s) {
  auto m = modality_from_string(s);
  if (!m) throw ConfigError("unknown modality: " + s);
  return *m;
}

}  // namespace

std::string_view to_string(Quant q) {
  switch (q) {
    case Quant::BF16: return "BF16";
    case Quant::INT8: return "INT8";
    case Quant::NF4: return "NF4";
    case Quant::Custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(Modality m) {
  return m == Modality::Static ? "static" : "video";
}

std::optional<Quant> quant_from_string(std::string_view s) {
  if (s == "BF16" || s == "bf16") return Quant::BF16;
  if (s == "INT8" || s == "int8") return Quant::INT8;
  if (s == "NF4" || s == "nf4") return Quant::NF4;
  if (s == "custom" || s == "Custom") return Quant::Custom;
  return std::nullopt;
}

std::optional<Modality> modality_from_string(std::string_view s) {
  if (s == "static" || s == "Static") return Modality::Static;
  if (s == "video" || s == "Video") return Modality::Video;
  return std::nullopt;
}

void QuantProfile::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(tpr) || !in_unit(fpr) || !in_unit(unknown_rate)) {
    throw ConfigError("profile rates must lie in [0,1]: " + key);
  }
  if (tpr + unknown_rate > 1.0 + 1e-12) {
    throw ConfigError("profile " + key + ": tpr + unknown_rate must not exceed 1");
  }
  if (mean_latency_s <= 0) throw ConfigError("profile " + key + ": mean_latency_s must be > 0");
  if (latency_jitter_s < 0) throw ConfigError("profile " + key + ": latency_jitter_s must be >= 0");
}

QuantProfile QuantProfile::from_counts(std::string key, Quant name, Modality modality,
                                       ConfusionCounts counts, double mean_latency_s,
                                       std::optional<double> jitter_s, double unknown_rate) {
  QuantProfile p;
  p.key = std::move(key);
  p.name = name;
  p.modality = modality;
  const std::int64_t positives = counts.tp + counts.fn;
  const std::int64_t negatives = counts.fp + counts.tn;
  if (positives <= 0 || negatives <= 0) {
    throw ConfigError("profile " + p.key + ": confusion counts need both classes");
  }
  p.tpr = static_cast<double>(counts.tp) / static_cast<double>(positives);
  p.fpr = static_cast<double>(counts.fp) / static_cast<double>(negatives);
  p.unknown_rate = unknown_rate;
  p.mean_latency_s = mean_latency_s;
  p.latency_jitter_s = jitter_s.value_or(0.1 * mean_latency_s);
  p.counts = counts;
  p.validate();
  return p;
}

const std::vector<QuantProfile>& builtin_profiles() {
  static const std::vector<QuantProfile> profiles = [] {
    std::vector<QuantProfile> v;
    // Video-stream benchmarks: 5 s windows, 2 s stride.
    v.push_back(QuantProfile::from_counts("BF16_video", Quant::BF16, Modality::Video,
                                          {51, 96, 84, 15}, 0.485));
    v.push_back(QuantProfile::from_counts("INT8_video", Quant::INT8, Modality::Video,
                                          {50, 99, 81, 16}, 0.787));
    v.push_back(QuantProfile::from_counts("NF4_video", Quant::NF4, Modality::Video,
                                          {7, 162, 18, 59}, 0.436));
    // Static-image benchmarks per prompt tier.
    v.push_back(QuantProfile::from_counts("NF4_Verbose_static", Quant::NF4, Modality::Static,
                                          {806, 279, 168, 909}, 0.80));
    v.push_back(QuantProfile::from_counts("INT8_Verbose_static", Quant::INT8, Modality::Static,
                                          {773, 301, 146, 942}, 1.33));
    v.push_back(QuantProfile::from_counts("INT8_Pruned_static", Quant::INT8, Modality::Static,
                                          {215, 263, 184, 1500}, 1.37));
    // Degenerate test profile: always right, constant latency.
    QuantProfile oracle;
    oracle.key = "oracle";
    oracle.name = Quant::Custom;
    oracle.modality = Modality::Video;
    oracle.tpr = 1.0;
    oracle.fpr = 0.0;
    oracle.unknown_rate = 0.0;
    oracle.mean_latency_s = 0.1;
    oracle.latency_jitter_s = 0.0;
    v.push_back(oracle);
    return v;
  }();
  return profiles;
}

const QuantProfile& builtin_profile(std::string_view key) {
  for (const auto& p : builtin_profiles()) {
    if (p.key == key) return p;
  }
  throw UnknownProfile(std::string(key));
}

QuantProfile load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile: " + path);
  ordered_json j = ordered_json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("profile file is not valid JSON: " + path);

  const std::string name = j.value("name", std::string{"custom"});
  const std::string modality = j.value("modality", std::string{"video"});
  const double unknown_rate = j.value("unknown_rate", 0.0);

  if (j.contains("tp")) {
    ConfusionCounts counts{j.at("tp").get<std::int64_t>(), j.at("tn").get<std::int64_t>(),
                           j.at("fp").get<std::int64_t>(), j.at("fn").get<std::int64_t>()};
    std::optional<double> jitter;
    if (j.contains("latency_jitter_s")) jitter = j.at("latency_jitter_s").get<double>();
    return QuantProfile::from_counts(j.value("key", name + "_" + modality), quant_or_throw(name),
                                     modality_or_throw(modality), counts,
                                     j.at("mean_latency_s").get<double>(), jitter, unknown_rate);
  }

  QuantProfile p;
  p.key = j.value("key", name + "_" + modality);
  p.name = quant_or_throw(name);
  p.modality = modality_or_throw(modality);
  p.tpr = j.at("tpr").get<double>();
  p.fpr = j.at("fpr").get<double>();
  p.unknown_rate = unknown_rate;
  p.mean_latency_s = j.at("mean_latency_s").get<double>();
  p.latency_jitter_s = j.value("latency_jitter_s", 0.1 * p.mean_latency_s);
  p.validate();
  return p;
}

std::string profile_to_json(const QuantProfile& profile) {
  ordered_json j;
  j["key"] = profile.key;
  j["name"] = std::string(to_string(profile.name));
  j["modality"] = std::string(to_string(profile.modality));
  if (profile.counts) {
    j["tp"] = profile.counts->tp;
    j["tn"] = profile.counts->tn;
    j["fp"] = profile.counts->fp;
    j["fn"] = profile.counts->fn;
  } else {
    j["tpr"] = profile.tpr;
    j["fpr"] = profile.fpr;
  }
  j["unknown_rate"] = profile.unknown_rate;
  j["mean_latency_s"] = profile.mean_latency_s;
  j["latency_jitter_s"] = profile.latency_jitter_s;
  return j.dump(2);
}

QuantProfile resolve_profile(const std::string& key_or_path) {
  for (const auto& p : builtin_profiles()) {
    if (p.key == key_or_path) return p;
  }
  std::ifstream probe(key_or_path);
  if (probe.good()) return load_profile_file(key_or_path);
  throw UnknownProfile(key_or_path);
}

// ---- replay --------------------------------------------------------------

ReplayBackend::ReplayBackend(const std::vector<log::PredictionRecord>& records) {
  for (const auto& r : records) {
    entries_[{r.clip_id, r.window_index}] =
        Entry{r.raw_text, r.tokens_generated, r.infer_s, r.profile};
  }
}

ReplayBackend ReplayBackend::from_log_file(const std::string& path) {
  return ReplayBackend(log::read_prediction_log_file(path).records);
}

BackendResponse ReplayBackend::infer(const BackendRequest& req) {
  const auto it = entries_.find({req.window.clip_id, req.window.window_index});
  if (it == entries_.end()) throw MissingRecord(req.window.clip_id, req.window.window_index);
  BackendResponse resp;
  resp.raw_text = it->second.raw_text;
  resp.tokens_generated = it->second.tokens_generated;
  resp.infer_s = it->second.infer_s;
  resp.backend_id = id();
  resp.profile = it->second.profile;
  return resp;
}

// ---- stochastic ------------------------------------------------------------

StochasticBackend::StochasticBackend(QuantProfile profile, std::uint64_t seed)
    : profile_(std::move(profile)), seed_(seed) {
  profile_.validate();
}

BackendResponse StochasticBackend::infer(const BackendRequest& req) {
  return stochastic_infer(req, profile_, seed_);
}

BackendResponse stochastic_infer(const BackendRequest& req, const QuantProfile& profile,
                                 std::uint64_t seed) {
  const auto& window = req.window;
  if (!window.label) throw MissingLabel(window.clip_id, window.window_index);

  // Per-window PRNG: evaluation order and parallelism cannot change draws.
  const std::uint64_t key =
      splitmix64(seed ^ splitmix64(fnv1a64(window.clip_id) +
                                   0x9e3779b97f4a7c15ULL *
                                       static_cast<std::uint64_t>(window.window_index + 1)));
  std::mt19937_64 rng(key);
  const double verdict_draw = uniform01(rng);
  const double latency_draw = uniform01(rng);

  std::string_view answer;
  if (*window.label == Label::Anomaly) {
    if (verdict_draw < profile.tpr) {
      answer = "Anomaly";
    } else if (verdict_draw < profile.tpr + profile.unknown_rate) {
      answer = "Unknown";
    } else {
      answer = "Normal";
    }
  } else {
    answer = verdict_draw < profile.fpr ? "Anomaly" : "Normal";
  }

  std::string text;
  if (req.prompt.expected_format == prompting::OutputFormat::XmlThinkAnswer) {
    std::ostringstream os;
    os << "<think>window " << window.id() << ": ";
    if (answer == "Anomaly") {
      os << "hazard indicators in the drivable region";
    } else if (answer == "Unknown") {
      os << "insufficient evidence to commit";
    } else {
      os << "scene consistent with nominal driving";
    }
    os << "</think>\n<answer>" << answer << "</answer>";
    text = os.str();
  } else {
    text = std::string(answer);
  }

  std::int64_t tokens = count_tokens(text);
  if (tokens > req.prompt.max_new_tokens) {
    // A real decoder stops at T_max mid-sentence; the stump it leaves is
    // usually unparseable, and that is the honest behavior to model.
    text = truncate_tokens(text, req.prompt.max_new_tokens);
    tokens = req.prompt.max_new_tokens;
  }

  BackendResponse resp;
  resp.raw_text = std::move(text);
  resp.tokens_generated = tokens;
  resp.infer_s =
      std::max(0.0, profile.mean_latency_s + (2.0 * latency_draw - 1.0) * profile.latency_jitter_s);
  resp.backend_id = "stochastic:" + profile.key;
  resp.profile = profile.key;
  return resp;
}

}  // namespace semobs::backend
