#include <doctest.h>

#include <algorithm>
#include <set>

#include "emocue/corpus.hpp"
#include "emocue/lexicon.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace emocue;

namespace {

Post make_post(std::string id, std::string body, Label label) {
  Post p;
  p.id = std::move(id);
  p.body = std::move(body);
  p.label = label;
  return p;
}

Corpus labelled_corpus(std::size_t sh, std::size_t nsh) {
  Corpus c;
  for (std::size_t i = 0; i < sh; ++i) {
    c.posts.push_back(make_post("sh" + std::to_string(i), "sad 💔 post", Label::SelfHarm));
  }
  for (std::size_t i = 0; i < nsh; ++i) {
    c.posts.push_back(make_post("nsh" + std::to_string(i), "fun post", Label::NonSelfHarm));
  }
  return c;
}

std::vector<std::string> sorted_emoji(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : emoji_tokens(text)) out.emplace_back(t.text);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> non_emoji_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : segment(text)) {
    if (t.kind == TokenKind::Word || t.kind == TokenKind::Punct) out.emplace_back(t.text);
  }
  return out;
}

}  // namespace

TEST_CASE("sample corpus loads and round trips") {
  const auto load = load_corpus(testutil::data("sample_corpus.jsonl"));
  CHECK(load.issues.empty());
  CHECK(load.corpus.posts.size() == 34);
  testutil::TempDir dir;
  save_corpus(load.corpus, dir / "c.jsonl");
  const auto again = load_corpus(dir / "c.jsonl");
  CHECK(again.corpus == load.corpus);
  CHECK(serialize_corpus(again.corpus) == serialize_corpus(load.corpus));
}

TEST_CASE("stats agree with an independent recount") {
  const auto path = testutil::data("sample_corpus.jsonl").string();
  const auto stats = corpus_stats(load_corpus(path).corpus);
  const auto ref = oracle::recount_jsonl(path);
  CHECK(stats.total == ref.total);
  CHECK(stats.self_harm == ref.self_harm);
  CHECK(stats.non_self_harm == ref.non_self_harm);
  CHECK(stats.with_emoji == ref.with_emoji);
  CHECK(stats.without_emoji == ref.without_emoji);
  CHECK(stats.original == ref.original);
  CHECK(stats.synthetic == ref.synthetic);
  CHECK(stats.sh_with_cm == ref.sh_with_cm);
  CHECK(stats.sh_with_si == ref.sh_with_si);
  CHECK(stats.nsh_with_cm == ref.nsh_with_cm);
  CHECK(stats.nsh_with_si == ref.nsh_with_si);
  CHECK(stats.average_words == doctest::Approx(ref.words).epsilon(1e-12));
  CHECK(stats.self_harm + stats.non_self_harm == stats.total);
  CHECK(stats.with_emoji + stats.without_emoji == stats.total);
}

TEST_CASE("empty corpus has undefined average") {
  const auto stats = corpus_stats(Corpus{});
  CHECK(stats.total == 0);
  CHECK_FALSE(stats.average_defined);
}

TEST_CASE("schema violations carry line numbers") {
  const std::string good =
      R"({"id":"a","body":"I hurt","label":"self-harm","si_spans":["hurt"]})";
  const std::string missing_span =
      R"({"id":"b","body":"all fine","label":"self-harm","si_spans":["hurt"]})";
  const std::string bad_json = R"({"id":"c","body":)";
  const std::string input = good + "\n" + missing_span + "\n";
  try {
    parse_corpus(input);
    FAIL("expected SchemaViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SchemaViolation);
    CHECK(e.line() == std::optional<std::size_t>(2));
  }
  try {
    parse_corpus(good + "\n" + bad_json + "\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(e.line() == std::optional<std::size_t>(2));
  }
  const auto lenient = parse_corpus(input + bad_json + "\n", LoadMode::Lenient);
  CHECK(lenient.corpus.posts.size() == 1);
  CHECK(lenient.dropped == 2);
  CHECK_FALSE(lenient.issues.empty());
}

TEST_CASE("post invariants") {
  Post p = make_post("x", "I want to end it", Label::SelfHarm);
  p.si_spans.push_back({"end it", 10, 16});
  CHECK(validate_post(p).empty());

  auto wrong_offsets = p;
  wrong_offsets.si_spans[0].char_start = 9;
  CHECK_FALSE(validate_post(wrong_offsets).empty());

  auto too_many = p;
  too_many.si_spans.assign(4, Span{"it", {}, {}});
  CHECK_FALSE(validate_post(too_many).empty());

  auto nsh_si = p;
  nsh_si.label = Label::NonSelfHarm;
  const auto issues = validate_post(nsh_si);
  CHECK(std::any_of(issues.begin(), issues.end(),
                    [](const Issue& i) { return i.severity == Severity::Error; }));

  auto bad_tag = p;
  bad_tag.strategy_tags.push_back({0, Strategy::Direct});
  CHECK_FALSE(validate_post(bad_tag).empty());  // body has no emoji
}

TEST_CASE("duplicate ids are rejected") {
  const std::string row = R"({"id":"a","body":"x","label":"non-self-harm"})";
  CHECK(testutil::error_code([&] { parse_corpus(row + "\n" + row + "\n"); }) ==
        Errc::SchemaViolation);
}

TEST_CASE("span offsets are code points") {
  Post p = make_post("x", "💔💔 cut", Label::SelfHarm);
  p.si_spans.push_back({"cut", 3, 6});
  CHECK(validate_post(p).empty());
  const auto ranges = span_ranges(Span{"cut", {}, {}}, p.body);
  REQUIRE(ranges.size() == 1);
  CHECK(ranges[0] == std::pair<std::size_t, std::size_t>{3, 6});
}

TEST_CASE("round_count is half to even") {
  CHECK(round_count(0.2, 30) == 6);
  CHECK(round_count(0.5, 5) == 2);
  CHECK(round_count(0.5, 7) == 4);
  CHECK(round_count(0.25, 10) == 2);
}

TEST_CASE("split is a stratified partition") {
  const auto corpus = labelled_corpus(90, 10);
  const auto split = split_corpus(corpus, 0.2, 42);
  std::size_t test_sh = 0, test_nsh = 0;
  for (const auto& p : split.test.posts) {
    (p.label == Label::SelfHarm ? test_sh : test_nsh) += 1;
    CHECK(p.split == Split::Test);
  }
  CHECK(test_sh == 18);
  CHECK(test_nsh == 2);
  CHECK(split.train.posts.size() == 80);
  std::set<std::string> ids;
  for (const auto& p : split.train.posts) ids.insert(p.id);
  for (const auto& p : split.test.posts) CHECK(ids.insert(p.id).second);
  CHECK(ids.size() == corpus.posts.size());
  CHECK(split_corpus(corpus, 0.2, 42).test == split.test);
}

TEST_CASE("synthetic posts always train") {
  auto corpus = labelled_corpus(10, 10);
  for (int i = 0; i < 5; ++i) {
    auto p = make_post("syn" + std::to_string(i), "made up", Label::SelfHarm);
    p.provenance = Provenance::Synthetic;
    corpus.posts.push_back(p);
  }
  const auto split = split_corpus(corpus, 0.5, 1);
  for (const auto& p : split.test.posts) CHECK(p.provenance == Provenance::Original);
  CHECK(split.train.posts.size() + split.test.posts.size() == 25);
}

TEST_CASE("split argument errors") {
  const auto corpus = labelled_corpus(3, 3);
  CHECK(testutil::error_code([&] { split_corpus(corpus, 0.0, 1); }) == Errc::InvalidArgument);
  CHECK(testutil::error_code([&] { split_corpus(corpus, 1.0, 1); }) == Errc::InvalidArgument);
  CHECK(testutil::error_code([&] { split_corpus(labelled_corpus(1, 0), 0.2, 1); }) ==
        Errc::InsufficientPosts);
}

TEST_CASE("perturb rewrites exactly round(f*n) emoji posts") {
  const auto corpus = load_corpus(testutil::data("sample_corpus.jsonl")).corpus;
  std::size_t emoji_posts = 0;
  for (const auto& p : corpus.posts) emoji_posts += has_emoji(p);
  const Lexicon lex = load_lexicon(testutil::repo_data("cesm_snapshot.tsv")).lexicon;
  for (auto mode : {PerturbMode::ShufflePositions, PerturbMode::ReplaceRandom}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto result = perturb(corpus, mode, 0.2, seed, &lex);
      CHECK(result.modified_ids.size() == round_count(0.2, emoji_posts));
      const std::set<std::string> modified(result.modified_ids.begin(), result.modified_ids.end());
      REQUIRE(result.corpus.posts.size() == corpus.posts.size());
      for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
        const auto& before = corpus.posts[i];
        const auto& after = result.corpus.posts[i];
        if (!modified.count(before.id)) {
          CHECK(after == before);
          continue;
        }
        CHECK(has_emoji(before));
        CHECK(after.label == before.label);
        CHECK(non_emoji_tokens(after.body) == non_emoji_tokens(before.body));
        CHECK(emoji_tokens(after.body).size() == emoji_tokens(before.body).size());
        if (mode == PerturbMode::ShufflePositions) {
          CHECK(sorted_emoji(after.body) == sorted_emoji(before.body));
        }
        for (std::size_t s = 0; s < before.si_spans.size(); ++s) {
          CHECK(after.si_spans[s].text == before.si_spans[s].text);
          CHECK_FALSE(after.si_spans[s].char_start.has_value());
        }
      }
    }
  }
}

TEST_CASE("perturb argument errors") {
  const auto corpus = labelled_corpus(3, 3);
  CHECK(testutil::error_code([&] {
          perturb(corpus, PerturbMode::ShufflePositions, 0.0, 1, nullptr);
        }) == Errc::InvalidArgument);
  CHECK(testutil::error_code([&] {
          perturb(corpus, PerturbMode::ReplaceRandom, 0.5, 1, nullptr);
        }) == Errc::InvalidArgument);
  CHECK(testutil::error_code([&] {
          perturb(labelled_corpus(0, 4), PerturbMode::ShufflePositions, 0.5, 1, nullptr);
        }) == Errc::EmptySelection);
}

TEST_CASE("emoji context report") {
  Corpus c;
  auto a = make_post("a", "I cut again 🔪🩸 today", Label::SelfHarm);
  a.si_spans.push_back({"cut again 🔪", {}, {}});
  a.strategy_tags.push_back({0, Strategy::Direct});
  auto b = make_post("b", "exam tomorrow kill me 😂", Label::NonSelfHarm);
  b.cm_spans.push_back({"kill me 😂", {}, {}});
  b.title = "😂";
  c.posts = {a, b};
  const Lexicon lex = load_lexicon(testutil::repo_data("cesm_snapshot.tsv")).lexicon;
  const auto report = emoji_context_report(c, &lex);
  const auto& knife = report.per_emoji.at(lexicon_key("🔪"));
  CHECK(knife.in_si_spans == 1);
  CHECK(knife.in_sh_posts == 1);
  CHECK(knife.in_lexicon);
  const auto& blood = report.per_emoji.at(lexicon_key("🩸"));
  CHECK(blood.in_si_spans == 0);
  const auto& laugh = report.per_emoji.at(lexicon_key("😂"));
  CHECK(laugh.in_nsh_posts == 2);
  CHECK(laugh.in_cm_spans == 1);
  CHECK(report.strategy.counts[0][0] == 2);
  CHECK(report.compositions.total() == 3);
}
