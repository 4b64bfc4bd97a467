#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace semobs {

// Ground-truth tag carried by frames and windows.
enum class Label { Normal, Anomaly };

// Constrained answer extracted from raw model output. Unparseable is a
// value, not an error: metric reports need to count it.
enum class Answer { Anomaly, Normal, Unknown, Unparseable };

// Final per-window classification recorded in prediction logs. TimedOut is
// assigned by the orchestrator watchdog, never by the output parser.
enum class DecisionClass { Normal, Anomaly, Unknown, Unparseable, TimedOut };

std::string_view to_string(Label v);
std::string_view to_string(Answer v);
std::string_view to_string(DecisionClass v);

std::optional<Label> label_from_string(std::string_view s);
std::optional<Answer> answer_from_string(std::string_view s);
std::optional<DecisionClass> decision_class_from_string(std::string_view s);

}  // namespace semobs
