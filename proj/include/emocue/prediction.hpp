#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "emocue/label.hpp"

namespace emocue {

/// How a completion was turned into a Prediction.
enum class ParseRoute {
  Strict,     // the whole completion is one JSON object
  Recovered,  // first balanced JSON object inside surrounding text
  Fallback,   // "Classification: ..." line, rest taken as rationale
};

std::string_view to_string(ParseRoute route);

struct Prediction {
  Label label = Label::NonSelfHarm;
  std::vector<std::string> cm_spans;
  std::vector<std::string> si_spans;
  std::string rationale;
  ParseRoute route = ParseRoute::Strict;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// The fine-tuning output object:
///   {"classification": ..., "casual_mention_spans": [...],
///    "serious_intent_spans": [...]}
/// plus "rationale" when it is non-empty.
std::string serialize_prediction(const Prediction& prediction);

}  // namespace emocue
