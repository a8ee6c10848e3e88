#include <doctest.h>

#include "emocue/corpus.hpp"
#include "emocue/emojitext.hpp"
#include "emocue/unicode.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace emocue;

namespace {

std::string concat(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += t.text;
  return out;
}

std::vector<std::string> emoji_texts(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : emoji_tokens(text)) out.emplace_back(t.text);
  return out;
}

const std::vector<std::string> kEmoji = {"😂", "💔", "⚰️", "👍🏽", "👨‍👩‍👧", "🇬🇧", "1️⃣", "🩸", "🔪", "❤️"};
const std::vector<std::string> kFiller = {"word", " ", "  ", ".", "!", "it's", "\n", "x-ray", ","};

}  // namespace

TEST_CASE("segment tiles the input") {
  oracle::Gen gen(7);
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const auto n = gen.below(12);
    for (std::size_t j = 0; j < n; ++j) text += gen.coin() ? gen.pick(kEmoji) : gen.pick(kFiller);
    const auto tokens = segment(text);
    CHECK(concat(tokens) == text);
    std::size_t pos = 0;
    for (const auto& t : tokens) {
      CHECK(t.char_start == pos);
      CHECK(t.char_end == pos + unicode::length(t.text));
      pos = t.char_end;
    }
    CHECK(pos == unicode::length(text));
  }
}

TEST_CASE("complex emoji sequences are one token each") {
  CHECK(emoji_texts("hi 👨‍👩‍👧 there") == std::vector<std::string>{"👨‍👩‍👧"});
  CHECK(emoji_texts("👍🏽") == std::vector<std::string>{"👍🏽"});
  CHECK(emoji_texts("🇬🇧🇫🇷") == std::vector<std::string>{"🇬🇧", "🇫🇷"});
  CHECK(emoji_texts("press 1️⃣ now") == std::vector<std::string>{"1️⃣"});
  CHECK(emoji_texts("⚰️💔") == std::vector<std::string>{"⚰️", "💔"});
  CHECK(emoji_texts("plain text 123 #").empty());
}

TEST_CASE("word runs keep apostrophes and hyphens") {
  const auto tokens = segment("it's x-ray");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0].kind == TokenKind::Word);
  CHECK(tokens[0].text == "it's");
  CHECK(tokens[1].kind == TokenKind::Whitespace);
  CHECK(tokens[2].text == "x-ray");
}

TEST_CASE("invalid UTF-8 is rejected") {
  CHECK(testutil::error_code([] { segment("abc\xff"); }) == Errc::InvalidUtf8);
}

TEST_CASE("compositions follow the adjacency rule") {
  const std::string text = "I'm fine 😂 😂💔 really 🔪.🩸";
  const auto loose = compositions(text);
  REQUIRE(loose.size() == 3);
  CHECK(loose[0].glyphs == std::vector<std::string>{"😂", "😂", "💔"});
  CHECK(loose[1].size() == 1);
  CHECK(loose[2].size() == 1);
  const auto strict = compositions(text, Adjacency::Strict);
  REQUIRE(strict.size() == 4);
  CHECK(strict[0].size() == 1);
  CHECK(strict[1].size() == 2);
}

TEST_CASE("compositions are ordered and disjoint") {
  oracle::Gen gen(11);
  for (int i = 0; i < 300; ++i) {
    std::string text;
    for (std::size_t j = 0, n = gen.below(15); j < n; ++j) {
      text += gen.below(3) ? gen.pick(kEmoji) : gen.pick(kFiller);
    }
    for (auto adj : {Adjacency::WhitespaceTolerant, Adjacency::Strict}) {
      const auto comps = compositions(text, adj);
      for (std::size_t k = 1; k < comps.size(); ++k) {
        CHECK(comps[k - 1].char_end <= comps[k].char_start);
      }
      std::size_t glyphs = 0;
      for (const auto& c : comps) {
        CHECK(c.size() >= 1);
        glyphs += c.size();
      }
      CHECK(glyphs == emoji_tokens(text).size());
    }
  }
}

TEST_CASE("a word between two emoji splits their composition") {
  oracle::Gen gen(3);
  for (int i = 0; i < 300; ++i) {
    const std::string left = gen.pick(kEmoji);
    const std::string right = gen.pick(kEmoji);
    const std::string sep = gen.coin() ? " " : "";
    const std::string joined = "a " + left + sep + right + " b";
    CHECK(compositions(joined).size() == 1);
    const std::string split = "a " + left + " word " + right + " b";
    CHECK(compositions(split).size() == 2);
  }
}

TEST_CASE("composition buckets") {
  CHECK(composition_bucket(1) == 0);
  CHECK(composition_bucket(2) == 1);
  CHECK(composition_bucket(3) == 2);
  CHECK(composition_bucket(4) == 3);
  CHECK(composition_bucket(17) == 3);
}

TEST_CASE("histogram matches a brute-force recount") {
  oracle::Gen gen(5);
  std::vector<Post> posts;
  for (int i = 0; i < 200; ++i) {
    Post p;
    p.id = "p" + std::to_string(i);
    p.label = gen.coin() ? Label::SelfHarm : Label::NonSelfHarm;
    for (std::size_t j = 0, n = gen.below(10); j < n; ++j) {
      p.body += gen.coin() ? gen.pick(kEmoji) : gen.pick(kFiller);
    }
    if (gen.coin()) p.title = gen.pick(kEmoji) + " title";
    posts.push_back(p);
  }
  const auto hist = composition_histogram(posts);
  std::array<std::array<std::size_t, 2>, 4> expect{};
  std::size_t total = 0;
  for (const auto& p : posts) {
    std::vector<std::string> parts{p.body};
    if (p.title) parts.push_back(*p.title);
    for (const auto& part : parts) {
      // Recount runs over the token stream: emoji extend a run, whitespace
      // keeps it open, anything else closes it.
      std::size_t run = 0;
      auto close = [&] {
        if (run) {
          ++expect[std::min<std::size_t>(run, 4) - 1][p.label == Label::SelfHarm ? 0 : 1];
          ++total;
        }
        run = 0;
      };
      for (const auto& t : segment(part)) {
        if (t.kind == TokenKind::Emoji) {
          ++run;
        } else if (t.kind != TokenKind::Whitespace) {
          close();
        }
      }
      close();
    }
  }
  CHECK(hist.counts == expect);
  CHECK(hist.total() == total);
}
