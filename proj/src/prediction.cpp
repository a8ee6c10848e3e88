#include "emocue/prediction.hpp"

#include <json.hpp>

namespace emocue {

std::string_view to_string(ParseRoute route) {
  switch (route) {
    case ParseRoute::Strict: return "strict";
    case ParseRoute::Recovered: return "recovered";
    case ParseRoute::Fallback: return "fallback";
  }
  return "strict";
}

std::string serialize_prediction(const Prediction& prediction) {
  nlohmann::ordered_json o;
  o["classification"] = to_string(prediction.label);
  o["casual_mention_spans"] = prediction.cm_spans;
  o["serious_intent_spans"] = prediction.si_spans;
  if (!prediction.rationale.empty()) o["rationale"] = prediction.rationale;
  return o.dump();
}

}  // namespace emocue
