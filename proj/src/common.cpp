#include "semobs/common.hpp"

namespace semobs {

std::string_view to_string(Label v) {
  return v == Label::Normal ? "Normal" : "Anomaly";
}

std::string_view to_string(Answer v) {
  switch (v) {
    case Answer::Anomaly: return "Anomaly";
    case Answer::Normal: return "Normal";
    case Answer::Unknown: return "Unknown";
    case Answer::Unparseable: return "Unparseable";
  }
  return "Unparseable";
}

std::string_view to_string(DecisionClass v) {
  switch (v) {
    case DecisionClass::Normal: return "Normal";
    case DecisionClass::Anomaly: return "Anomaly";
    case DecisionClass::Unknown: return "Unknown";
    case DecisionClass::Unparseable: return "Unparseable";
    case DecisionClass::TimedOut: return "TimedOut";
  }
  return "Unparseable";
}

std::optional<Label> label_from_string(std::string_view s) {
  if (s == "Normal") return Label::Normal;
  if (s == "Anomaly") return Label::Anomaly;
  return std::nullopt;
}

std::optional<Answer> answer_from_string(std::string_view s) {
  if (s == "Anomaly") return Answer::Anomaly;
  if (s == "Normal") return Answer::Normal;
  if (s == "Unknown") return Answer::Unknown;
  if (s == "Unparseable") return Answer::Unparseable;
  return std::nullopt;
}

std::optional<DecisionClass> decision_class_from_string(std::string_view s) {
  if (s == "Normal") return DecisionClass::Normal;
  if (s == "Anomaly") return DecisionClass::Anomaly;
  if (s == "Unknown") return DecisionClass::Unknown;
  if (s == "Unparseable") return DecisionClass::Unparseable;
  if (s == "TimedOut") return DecisionClass::TimedOut;
  return std::nullopt;
}

}  // namespace semobs
