#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace emocue {

enum class Label { SelfHarm, NonSelfHarm };

/// "self-harm" / "non-self-harm".
std::string_view to_string(Label label);

/// Accepts the canonical names plus the prompt spellings ("non self-harm",
/// "Non Self-harm", "non_self_harm"), case-insensitively.
std::optional<Label> parse_label(std::string_view text);

inline Label flipped(Label label) {
  return label == Label::SelfHarm ? Label::NonSelfHarm : Label::SelfHarm;
}

}  // namespace emocue
