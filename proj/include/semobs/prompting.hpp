#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semobs/common.hpp"

namespace semobs::prompting {

enum class PromptTier { Verbose, Pruned, Minimal };

// How constrained decoding is expected to shape the output.
enum class OutputFormat { BareWord, XmlThinkAnswer };

std::string_view to_string(PromptTier tier);
std::optional<PromptTier> tier_from_string(std::string_view s);

/**
 * A fully rendered prompt plus its decoding constraints. `template_hash` is
 * the SHA-256 of the template resource bytes and is stamped into every
 * prediction record, so reports stay attributable to an exact prompt.
 */
struct PromptSpec {
  PromptTier tier = PromptTier::Verbose;
  std::string text;
  int max_new_tokens = 256;  // T_max
  OutputFormat expected_format = OutputFormat::XmlThinkAnswer;
  std::vector<std::string> allowed_answers{"Anomaly", "Normal", "Unknown"};
  std::string template_id;
  std::string template_hash;
};

struct ParsedVerdict {
  Answer answer = Answer::Unparseable;
  int violation = 0;  // 1 iff answer == Anomaly
  std::optional<std::string> think_text;
  std::int64_t tokens_generated = 0;
};

using Context = std::map<std::string, std::string>;

// Versioned template resource embedded at build time from
// resources/prompts/<id>.txt.
struct TemplateResource {
  std::string id;
  std::string text;
  std::string hash;  // lowercase hex sha256 of the resource bytes
};

const TemplateResource& template_for(PromptTier tier);

// Substitutes {key} placeholders from `context`. A referenced key that is
// absent raises MissingContextKey; unreferenced context entries are left to
// the caller.
std::string render_template(std::string_view text, const Context& context);

// Renders the tier's template and appends any context entries the template
// did not consume as a trailing "Context: k=v; ..." line. The shipped
// templates reference no keys, so with an empty context the text is the
// template verbatim.
PromptSpec build_prompt(PromptTier tier, const Context& context = {});

// Maps raw decoded text to a constrained verdict. Never throws: anything
// that fails the expected format is Unparseable, which metrics count
// separately. `tokens_generated` is stamped into the verdict unchanged.
ParsedVerdict parse_output(std::string_view raw, const PromptSpec& spec,
                           std::int64_t tokens_generated = 0);

struct BudgetCheck {
  bool ok = true;
  std::int64_t overshoot = 0;  // tokens beyond T_max when !ok
};

// The backend is instructed via max_new_tokens; this catches backends that
// ignored it.
BudgetCheck enforce_budget(const PromptSpec& spec, std::int64_t tokens_generated);

struct BinaryDecision {
  int z = 0;  // 1 only for Anomaly
  DecisionClass decision_class = DecisionClass::Normal;
};

// Unknown and Unparseable map to z = 0 for triggering but keep their class
// for metrics.
BinaryDecision to_decision(const ParsedVerdict& verdict);

}  // namespace semobs::prompting
