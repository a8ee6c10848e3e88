#pragma once

// Word/emoji tokenization and emoji composition analysis.
//
// All character offsets in this library are code point indices into the
// UTF-8 string they refer to, half-open [char_start, char_end).

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "emocue/label.hpp"

namespace emocue {

enum class TokenKind { Word, Emoji, Punct, Whitespace };

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Word;
  std::string_view text;  // view into the segmented string
  std::size_t char_start = 0;
  std::size_t char_end = 0;
};

/// Concatenating the token texts reproduces `text` exactly. Each emoji
/// grapheme (ZWJ sequence, modifier sequence, flag, keycap) is one token;
/// consecutive word, whitespace and punctuation graphemes are merged into
/// one token per run. Apostrophes and hyphens between word characters stay
/// inside the word. Throws Error(InvalidUtf8).
std::vector<Token> segment(std::string_view text);

struct EmojiComposition {
  std::vector<std::string> glyphs;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  std::size_t size() const noexcept { return glyphs.size(); }
};

enum class Adjacency {
  /// Emoji separated by nothing or by whitespace only form one run.
  WhitespaceTolerant,
  /// Only directly adjacent emoji form one run.
  Strict,
};

/// Maximal emoji runs in order of char_start.
std::vector<EmojiComposition> compositions(
    std::string_view text, Adjacency adjacency = Adjacency::WhitespaceTolerant);

/// Emoji grapheme tokens of `text`, in order.
std::vector<Token> emoji_tokens(std::string_view text);

/// Bucket index for a composition length: 1, 2, 3 -> 0, 1, 2; >= 4 -> 3.
std::size_t composition_bucket(std::size_t length);

inline constexpr std::array<std::string_view, 4> kCompositionBuckets = {
    "1", "2", "3", "4+"};

struct CompositionHistogram {
  // counts[bucket][0] = self-harm, counts[bucket][1] = non-self-harm
  std::array<std::array<std::size_t, 2>, 4> counts{};

  std::size_t& at(std::size_t bucket, Label label) {
    return counts[bucket][label == Label::SelfHarm ? 0 : 1];
  }
  std::size_t at(std::size_t bucket, Label label) const {
    return counts[bucket][label == Label::SelfHarm ? 0 : 1];
  }
  std::size_t total() const;
};

struct Post;

/// Counts the compositions of title and body (separately, never across the
/// two) of every post.
CompositionHistogram composition_histogram(
    const std::vector<Post>& posts,
    Adjacency adjacency = Adjacency::WhitespaceTolerant);

}  // namespace emocue
