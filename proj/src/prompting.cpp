#include "semobs/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "semobs/errors.hpp"
#include "semobs/hash.hpp"

namespace semobs::prompting {

namespace detail {
extern const char* const kMinimalTemplateId;
extern const char* const kMinimalTemplateText;
extern const char* const kPrunedTemplateId;
extern const char* const kPrunedTemplateText;
extern const char* const kVerboseTemplateId;
extern const char* const kVerboseTemplateText;
}  // namespace detail

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool ci_equal(std::string_view a, std::string_view b) {
  return ascii_lower(a) == ascii_lower(b);
}

// Strips surrounding whitespace and light punctuation; quantized decoding
// jitter around the answer word must not flip a safety decision.
std::string_view strip_ws_punct(std::string_view s) {
  constexpr std::string_view kStrip = " \t\r\n.,;:!?'\"`*_()[]{}";
  const auto begin = s.find_first_not_of(kStrip);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(kStrip);
  return s.substr(begin, end - begin + 1);
}

// Case-insensitive search for `needle` in `haystack`, from `from`.
std::size_t ci_find(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(haystack[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j]))) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

// Last <tag>...</tag> span, tags matched case-insensitively. Returns the
// inner content.
std::optional<std::string_view> last_tag_span(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  std::size_t best_open = std::string_view::npos;
  std::size_t best_close = std::string_view::npos;
  std::size_t from = 0;
  while (true) {
    const std::size_t o = ci_find(text, open, from);
    if (o == std::string_view::npos) break;
    const std::size_t c = ci_find(text, close, o + open.size());
    if (c == std::string_view::npos) break;
    best_open = o + open.size();
    best_close = c;
    from = c + close.size();
  }
  if (best_open == std::string_view::npos) return std::nullopt;
  return text.substr(best_open, best_close - best_open);
}

std::optional<Answer> match_allowed(std::string_view candidate, const PromptSpec& spec) {
  for (const auto& allowed : spec.allowed_answers) {
    if (!ci_equal(candidate, allowed)) continue;
    if (ci_equal(allowed, "Anomaly")) return Answer::Anomaly;
    if (ci_equal(allowed, "Normal")) return Answer::Normal;
    if (ci_equal(allowed, "Unknown")) return Answer::Unknown;
  }
  return std::nullopt;
}

int default_budget(PromptTier tier) {
  switch (tier) {
    case PromptTier::Minimal: return 3;
    case PromptTier::Pruned: return 64;
    case PromptTier::Verbose: return 256;
  }
  return 256;
}

}  // namespace

std::string_view to_string(PromptTier tier) {
  switch (tier) {
    case PromptTier::Verbose: return "Verbose";
    case PromptTier::Pruned: return "Pruned";
    case PromptTier::Minimal: return "Minimal";
  }
  return "Verbose";
}

std::optional<PromptTier> tier_from_string(std::string_view s) {
  if (ci_equal(s, "Verbose")) return PromptTier::Verbose;
  if (ci_equal(s, "Pruned")) return PromptTier::Pruned;
  if (ci_equal(s, "Minimal")) return PromptTier::Minimal;
  return std::nullopt;
}

const TemplateResource& template_for(PromptTier tier) {
  static const TemplateResource minimal{detail::kMinimalTemplateId, detail::kMinimalTemplateText,
                                        sha256_hex(detail::kMinimalTemplateText)};
  static const TemplateResource pruned{detail::kPrunedTemplateId, detail::kPrunedTemplateText,
                                       sha256_hex(detail::kPrunedTemplateText)};
  static const TemplateResource verbose{detail::kVerboseTemplateId, detail::kVerboseTemplateText,
                                        sha256_hex(detail::kVerboseTemplateText)};
  switch (tier) {
    case PromptTier::Minimal: return minimal;
    case PromptTier::Pruned: return pruned;
    case PromptTier::Verbose: return verbose;
  }
  return verbose;
}

std::string render_template(std::string_view text, const Context& context) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        const std::string_view key = text.substr(i + 1, close - i - 1);
        const bool identifier =
            !key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) {
              return std::isalnum(c) || c == '_';
            });
        if (identifier) {
          auto it = context.find(std::string(key));
          if (it == context.end()) throw MissingContextKey(std::string(key));
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

PromptSpec build_prompt(PromptTier tier, const Context& context) {
  const TemplateResource& res = template_for(tier);

  // Keys the template consumes directly are not repeated in the context line.
  Context leftover;
  for (const auto& [k, v] : context) {
    if (res.text.find("{" + k + "}") == std::string::npos) leftover.emplace(k, v);
  }

  PromptSpec spec;
  spec.tier = tier;
  spec.text = render_template(res.text, context);
  if (!leftover.empty()) {
    std::ostringstream line;
    line << "Context:";
    for (const auto& [k, v] : leftover) line << " " << k << "=" << v << ";";
    if (!spec.text.empty() && spec.text.back() != '\n') spec.text += '\n';
    spec.text += line.str();
    spec.text += '\n';
  }
  spec.max_new_tokens = default_budget(tier);
  spec.expected_format =
      tier == PromptTier::Minimal ? OutputFormat::BareWord : OutputFormat::XmlThinkAnswer;
  spec.template_id = res.id;
  spec.template_hash = res.hash;
  return spec;
}

ParsedVerdict parse_output(std::string_view raw, const PromptSpec& spec,
                           std::int64_t tokens_generated) {
  ParsedVerdict verdict;
  verdict.tokens_generated = tokens_generated;

  std::optional<Answer> answer;
  std::optional<std::string> think;
  if (spec.expected_format == OutputFormat::XmlThinkAnswer) {
    if (auto span = last_tag_span(raw, "answer")) {
      answer = match_allowed(strip_ws_punct(*span), spec);
    }
    if (answer) {
      if (auto t = last_tag_span(raw, "think")) think = std::string(*t);
    }
  } else {
    answer = match_allowed(strip_ws_punct(raw), spec);
  }

  if (!answer) {
    verdict.answer = Answer::Unparseable;
    verdict.violation = 0;
    return verdict;  // Unparseable carries no explanation artifact
  }
  verdict.answer = *answer;
  verdict.violation = (*answer == Answer::Anomaly) ? 1 : 0;
  verdict.think_text = std::move(think);
  return verdict;
}

BudgetCheck enforce_budget(const PromptSpec& spec, std::int64_t tokens_generated) {
  if (tokens_generated <= spec.max_new_tokens) return {true, 0};
  return {false, tokens_generated - spec.max_new_tokens};
}

BinaryDecision to_decision(const ParsedVerdict& verdict) {
  switch (verdict.answer) {
    case Answer::Anomaly: return {1, DecisionClass::Anomaly};
    case Answer::Normal: return {0, DecisionClass::Normal};
    case Answer::Unknown: return {0, DecisionClass::Unknown};
    case Answer::Unparseable: return {0, DecisionClass::Unparseable};
  }
  return {0, DecisionClass::Unparseable};
}

}  // namespace semobs::prompting
