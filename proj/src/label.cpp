#include "emocue/label.hpp"

#include <cctype>

namespace emocue {

std::string_view to_string(Label label) {
  return label == Label::SelfHarm ? "self-harm" : "non-self-harm";
}

std::optional<Label> parse_label(std::string_view text) {
  std::string norm;
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (c == ' ' || c == '_') {
      norm.push_back('-');
    } else {
      norm.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  while (!norm.empty() && norm.back() == '-') norm.pop_back();
  while (!norm.empty() && norm.front() == '-') norm.erase(norm.begin());
  if (norm == "self-harm" || norm == "selfharm" || norm == "sh") {
    return Label::SelfHarm;
  }
  if (norm == "non-self-harm" || norm == "non-selfharm" || norm == "nsh") {
    return Label::NonSelfHarm;
  }
  return std::nullopt;
}

}  // namespace emocue
