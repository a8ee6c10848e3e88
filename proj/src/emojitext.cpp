#include "emocue/emojitext.hpp"

#include <algorithm>

#include "emocue/corpus.hpp"
#include "emocue/unicode.hpp"

namespace emocue {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return "word";
    case TokenKind::Emoji: return "emoji";
    case TokenKind::Punct: return "punct";
    case TokenKind::Whitespace: return "whitespace";
  }
  return "word";
}

namespace {

TokenKind classify(std::string_view cluster) {
  const std::u32string cps = unicode::decode_utf8(cluster);
  if (unicode::is_emoji_grapheme(cps)) return TokenKind::Emoji;
  if (std::all_of(cps.begin(), cps.end(), unicode::is_white_space)) {
    return TokenKind::Whitespace;
  }
  if (unicode::is_word_char(cps.front())) return TokenKind::Word;
  return TokenKind::Punct;
}

bool is_word_joiner(std::string_view cluster) {
  return cluster == "'" || cluster == "\xE2\x80\x99" /* U+2019 */ ||
         cluster == "-";
}

}  // namespace

std::vector<Token> segment(std::string_view text) {
  const std::vector<unicode::Grapheme> clusters = unicode::graphemes(text);
  std::vector<TokenKind> kinds;
  kinds.reserve(clusters.size());
  for (const auto& g : clusters) kinds.push_back(classify(g.text));

  // a joiner between two word graphemes belongs to the word
  for (std::size_t i = 1; i + 1 < clusters.size(); ++i) {
    if (kinds[i] == TokenKind::Punct && is_word_joiner(clusters[i].text) &&
        kinds[i - 1] == TokenKind::Word && kinds[i + 1] == TokenKind::Word) {
      kinds[i] = TokenKind::Word;
    }
  }

  std::vector<Token> tokens;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& g = clusters[i];
    const TokenKind kind = kinds[i];
    if (!tokens.empty() && kind != TokenKind::Emoji &&
        tokens.back().kind == kind) {
      Token& last = tokens.back();
      last.text = std::string_view(last.text.data(),
                                   last.text.size() + g.text.size());
      last.char_end = g.char_end;
      continue;
    }
    tokens.push_back(Token{kind, g.text, g.char_begin, g.char_end});
  }
  return tokens;
}

std::vector<EmojiComposition> compositions(std::string_view text,
                                           Adjacency adjacency) {
  std::vector<EmojiComposition> out;
  bool open = false;
  for (const Token& t : segment(text)) {
    switch (t.kind) {
      case TokenKind::Emoji:
        if (!open) {
          out.push_back(EmojiComposition{{}, t.char_start, t.char_end});
          open = true;
        }
        out.back().glyphs.emplace_back(t.text);
        out.back().char_end = t.char_end;
        break;
      case TokenKind::Whitespace:
        if (adjacency == Adjacency::Strict) open = false;
        break;
      case TokenKind::Word:
      case TokenKind::Punct:
        open = false;
        break;
    }
  }
  return out;
}

std::vector<Token> emoji_tokens(std::string_view text) {
  std::vector<Token> out;
  for (const Token& t : segment(text)) {
    if (t.kind == TokenKind::Emoji) out.push_back(t);
  }
  return out;
}

std::size_t composition_bucket(std::size_t length) {
  return length >= 4 ? 3 : (length == 0 ? 0 : length - 1);
}

std::size_t CompositionHistogram::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) n += row[0] + row[1];
  return n;
}

CompositionHistogram composition_histogram(const std::vector<Post>& posts,
                                           Adjacency adjacency) {
  CompositionHistogram hist;
  for (const Post& post : posts) {
    const auto count = [&](std::string_view text) {
      for (const auto& c : compositions(text, adjacency)) {
        ++hist.at(composition_bucket(c.size()), post.label);
      }
    };
    if (post.title) count(*post.title);
    count(post.body);
  }
  return hist;
}

}  // namespace emocue
