#pragma once

// UTF-8 handling, character properties and extended grapheme cluster
// segmentation (UAX #29).
//
// Character properties come from the ICU library the build links against;
// kUnicodeVersion names the Unicode Character Database version in effect
// (Unicode 14.0 with ICU 70). The segmentation rules themselves are
// implemented here.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace emocue::unicode {

extern const std::string_view kUnicodeVersion;

/// Throws Error(InvalidUtf8) with the byte offset of the first bad sequence.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);
bool is_valid_utf8(std::string_view text);

/// Number of code points; `text` must be valid UTF-8.
std::size_t length(std::string_view text);

enum class GraphemeBreak {
  Other,
  CR,
  LF,
  Control,
  Extend,
  ZWJ,
  RegionalIndicator,
  Prepend,
  SpacingMark,
  L,
  V,
  T,
  LV,
  LVT,
};

GraphemeBreak grapheme_break(char32_t cp);
bool is_extended_pictographic(char32_t cp);
bool is_regional_indicator(char32_t cp);

/// Emoji, Emoji_Component, Emoji_Modifier or Extended_Pictographic.
bool has_emoji_property(char32_t cp);
bool is_emoji_presentation(char32_t cp);

bool is_white_space(char32_t cp);
bool is_punctuation(char32_t cp);
/// Letters, digits, combining marks and connector punctuation.
bool is_word_char(char32_t cp);

inline constexpr char32_t kZwj = 0x200D;
inline constexpr char32_t kVs16 = 0xFE0F;
inline constexpr char32_t kKeycap = 0x20E3;

/// Cluster boundaries as code point indices; always starts with 0 and ends
/// with text.size() (a lone 0 for empty input).
std::vector<std::size_t> grapheme_boundaries(std::u32string_view text);

struct Grapheme {
  std::string_view text;
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
};

/// Segments UTF-8 text. Views point into `text`.
std::vector<Grapheme> graphemes(std::string_view text);

/// True when the cluster renders as an emoji: every code point carries an
/// emoji property and the cluster is pictographic (see README for the rule
/// on text-presentation characters).
bool is_emoji_grapheme(std::u32string_view cluster);
bool is_emoji_grapheme(std::string_view cluster_utf8);

/// NFC normalization.
std::string nfc(std::string_view text);
/// Simple per-code-point lowercase mapping.
std::string to_lower(std::string_view text);

}  // namespace emocue::unicode
