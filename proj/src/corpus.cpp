#include "emocue/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "emocue/error.hpp"
#include "emocue/io.hpp"
#include "emocue/lexicon.hpp"
#include "emocue/unicode.hpp"

namespace emocue {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Direct: return "direct";
    case Strategy::Metaphorical: return "metaphorical";
    case Strategy::SemanticList: return "semantic_list";
  }
  return "direct";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  if (text == "direct" || text == "DR") return Strategy::Direct;
  if (text == "metaphorical" || text == "MU") return Strategy::Metaphorical;
  if (text == "semantic_list" || text == "SL") return Strategy::SemanticList;
  return std::nullopt;
}

std::string_view to_string(Provenance p) {
  return p == Provenance::Original ? "original" : "synthetic";
}

std::string_view to_string(Split s) {
  return s == Split::Train ? "train" : "test";
}

std::string_view to_string(PerturbMode mode) {
  return mode == PerturbMode::ShufflePositions ? "shuffle" : "replace";
}

std::optional<PerturbMode> parse_perturb_mode(std::string_view text) {
  if (text == "shuffle" || text == "shuffle-positions") {
    return PerturbMode::ShufflePositions;
  }
  if (text == "replace" || text == "replace-random") {
    return PerturbMode::ReplaceRandom;
  }
  return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> span_ranges(
    const Span& span, std::string_view body) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (span.char_start && span.char_end) {
    out.emplace_back(*span.char_start, *span.char_end);
    return out;
  }
  if (span.text.empty()) return out;
  std::size_t pos = body.find(span.text);
  while (pos != std::string_view::npos) {
    const std::size_t start = unicode::length(body.substr(0, pos));
    out.emplace_back(start, start + unicode::length(span.text));
    pos = body.find(span.text, pos + span.text.size());
  }
  return out;
}

std::string post_text(const Post& post) {
  if (!post.title || post.title->empty()) return post.body;
  return *post.title + "\n" + post.body;
}

bool has_emoji(const Post& post) {
  if (post.title && !emoji_tokens(*post.title).empty()) return true;
  return !emoji_tokens(post.body).empty();
}

namespace {

Issue error_issue(std::string field, std::string reason) {
  return Issue{0, std::move(field), std::move(reason), Severity::Error};
}

void check_spans(const std::vector<Span>& spans, const char* field,
                 const std::string& body, std::size_t body_len,
                 std::vector<Issue>& issues) {
  if (spans.size() > kMaxSpansPerCategory) {
    issues.push_back(error_issue(
        field, "at most " + std::to_string(kMaxSpansPerCategory) +
                   " spans allowed, found " + std::to_string(spans.size())));
  }
  for (const Span& span : spans) {
    if (span.text.empty()) {
      issues.push_back(error_issue(field, "empty span text"));
      continue;
    }
    if (span.char_start.has_value() != span.char_end.has_value()) {
      issues.push_back(error_issue(field, "span '" + span.text +
                                              "' needs both start and end"));
      continue;
    }
    if (span.char_start) {
      const std::size_t s = *span.char_start;
      const std::size_t e = *span.char_end;
      if (s >= e || e > body_len) {
        issues.push_back(error_issue(
            field, "span '" + span.text + "' offsets [" + std::to_string(s) +
                       "," + std::to_string(e) + ") out of range"));
        continue;
      }
      const std::u32string cps = unicode::decode_utf8(body);
      if (unicode::encode_utf8(std::u32string_view(cps).substr(s, e - s)) !=
          span.text) {
        issues.push_back(error_issue(
            field, "span '" + span.text + "' does not match body at [" +
                       std::to_string(s) + "," + std::to_string(e) + ")"));
      }
    } else if (body.find(span.text) == std::string::npos) {
      issues.push_back(
          error_issue(field, "span '" + span.text + "' not found in body"));
    }
  }
}

}  // namespace

std::vector<Issue> validate_post(const Post& post) {
  std::vector<Issue> issues;
  if (post.id.empty()) issues.push_back(error_issue("id", "empty id"));
  if (post.body.empty()) {
    issues.push_back(error_issue("body", "empty body"));
    return issues;
  }
  if (!unicode::is_valid_utf8(post.body) ||
      (post.title && !unicode::is_valid_utf8(*post.title))) {
    issues.push_back(error_issue("body", "invalid UTF-8"));
    return issues;
  }
  const std::size_t body_len = unicode::length(post.body);
  check_spans(post.cm_spans, "cm_spans", post.body, body_len, issues);
  check_spans(post.si_spans, "si_spans", post.body, body_len, issues);
  if (post.label == Label::NonSelfHarm && !post.si_spans.empty()) {
    issues.push_back(
        error_issue("si_spans", "non-self-harm post carries serious intent spans"));
  }
  if (post.label == Label::NonSelfHarm && post.cm_spans.empty()) {
    issues.push_back(Issue{0, "cm_spans", "non-self-harm post without casual mention spans",
                           Severity::Warning});
  }
  if (!post.strategy_tags.empty()) {
    const std::size_t n = compositions(post.body).size();
    for (const StrategyTag& tag : post.strategy_tags) {
      if (tag.composition >= n) {
        issues.push_back(error_issue(
            "strategy_tags", "composition index " +
                                 std::to_string(tag.composition) +
                                 " out of range (body has " +
                                 std::to_string(n) + ")"));
      }
    }
  }
  return issues;
}

namespace {

// Throws SchemaViolation for structural problems in one JSON record.
Post post_from_json(const json& obj) {
  const auto violation = [](const std::string& field, const std::string& why) {
    return Error(Errc::SchemaViolation, field + ": " + why);
  };
  if (!obj.is_object()) throw violation("<record>", "not a JSON object");

  Post post;
  if (!obj.contains("id")) throw violation("id", "missing");
  if (obj["id"].is_string()) {
    post.id = obj["id"].get<std::string>();
  } else if (obj["id"].is_number_integer()) {
    post.id = std::to_string(obj["id"].get<long long>());
  } else {
    throw violation("id", "must be a string");
  }

  if (obj.contains("title") && !obj["title"].is_null()) {
    if (!obj["title"].is_string()) throw violation("title", "must be a string");
    post.title = obj["title"].get<std::string>();
  }
  if (!obj.contains("body") || !obj["body"].is_string()) {
    throw violation("body", "missing or not a string");
  }
  post.body = obj["body"].get<std::string>();

  if (!obj.contains("label") || !obj["label"].is_string()) {
    throw violation("label", "missing or not a string");
  }
  const auto label = parse_label(obj["label"].get<std::string>());
  if (!label) {
    throw violation("label", "unknown label '" + obj["label"].get<std::string>() + "'");
  }
  post.label = *label;

  const auto read_spans = [&](const char* key, std::vector<Span>& dst) {
    if (!obj.contains(key) || obj[key].is_null()) return;
    if (!obj[key].is_array()) throw violation(key, "must be an array");
    for (const json& s : obj[key]) {
      Span span;
      if (s.is_string()) {
        span.text = s.get<std::string>();
      } else if (s.is_object() && s.contains("text") && s["text"].is_string()) {
        span.text = s["text"].get<std::string>();
        for (const char* k : {"start", "end"}) {
          if (!s.contains(k) || s[k].is_null()) continue;
          if (!s[k].is_number_unsigned()) {
            throw violation(key, std::string("span '") + k +
                                     "' must be a non-negative integer");
          }
        }
        if (s.contains("start") && !s["start"].is_null()) {
          span.char_start = s["start"].get<std::size_t>();
        }
        if (s.contains("end") && !s["end"].is_null()) {
          span.char_end = s["end"].get<std::size_t>();
        }
      } else {
        throw violation(key, "span must be a string or {text, start, end}");
      }
      dst.push_back(std::move(span));
    }
  };
  read_spans("cm_spans", post.cm_spans);
  read_spans("si_spans", post.si_spans);

  if (obj.contains("strategy_tags") && !obj["strategy_tags"].is_null()) {
    const json& tags = obj["strategy_tags"];
    if (!tags.is_array()) throw violation("strategy_tags", "must be an array");
    for (std::size_t i = 0; i < tags.size(); ++i) {
      const json& t = tags[i];
      StrategyTag tag;
      std::string name;
      if (t.is_string()) {
        tag.composition = i;
        name = t.get<std::string>();
      } else if (t.is_object() && t.contains("strategy") &&
                 t["strategy"].is_string() && t.contains("composition") &&
                 t["composition"].is_number_unsigned()) {
        tag.composition = t["composition"].get<std::size_t>();
        name = t["strategy"].get<std::string>();
      } else {
        throw violation("strategy_tags", "entry must be {composition, strategy}");
      }
      const auto strategy = parse_strategy(name);
      if (!strategy) throw violation("strategy_tags", "unknown strategy '" + name + "'");
      tag.strategy = *strategy;
      post.strategy_tags.push_back(tag);
    }
  }

  if (obj.contains("provenance") && !obj["provenance"].is_null()) {
    const std::string p = obj["provenance"].is_string()
                              ? obj["provenance"].get<std::string>()
                              : std::string();
    if (p == "original") {
      post.provenance = Provenance::Original;
    } else if (p == "synthetic") {
      post.provenance = Provenance::Synthetic;
    } else {
      throw violation("provenance", "expected 'original' or 'synthetic'");
    }
  }
  if (obj.contains("split") && !obj["split"].is_null()) {
    const std::string s =
        obj["split"].is_string() ? obj["split"].get<std::string>() : std::string();
    if (s == "train") {
      post.split = Split::Train;
    } else if (s == "test") {
      post.split = Split::Test;
    } else {
      throw violation("split", "expected 'train', 'test' or null");
    }
  }
  return post;
}

std::string describe(const std::vector<Issue>& issues) {
  std::ostringstream out;
  std::size_t shown = 0;
  for (const Issue& i : issues) {
    if (i.severity != Severity::Error) continue;
    if (shown++ > 0) out << "; ";
    out << "line " << i.line << " " << i.field << ": " << i.reason;
  }
  return out.str();
}

}  // namespace

CorpusLoad parse_corpus(std::string_view jsonl, LoadMode mode) {
  CorpusLoad out;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      if (mode == LoadMode::Strict) throw Error(Errc::ParseError, e.what(), line_no);
      out.issues.push_back({line_no, "<record>", e.what(), Severity::Error});
      ++out.dropped;
      continue;
    }

    Post post;
    try {
      post = post_from_json(obj);
    } catch (const Error& e) {
      out.issues.push_back({line_no, "<record>", e.what(), Severity::Error});
      if (mode == LoadMode::Strict) {
        throw Error(Errc::SchemaViolation, describe(out.issues), line_no);
      }
      ++out.dropped;
      continue;
    }

    std::vector<Issue> issues = validate_post(post);
    if (!ids.insert(post.id).second) {
      issues.push_back(error_issue("id", "duplicate id '" + post.id + "'"));
    }
    bool bad = false;
    for (Issue& i : issues) {
      i.line = line_no;
      bad = bad || i.severity == Severity::Error;
      out.issues.push_back(i);
    }
    if (bad) {
      if (mode == LoadMode::Strict) {
        throw Error(Errc::SchemaViolation, describe(out.issues), line_no);
      }
      ++out.dropped;
      continue;
    }
    out.corpus.posts.push_back(std::move(post));
  }
  return out;
}

CorpusLoad load_corpus(const std::filesystem::path& path, LoadMode mode) {
  return parse_corpus(io::read_file(path), mode);
}

namespace {

ojson spans_json(const std::vector<Span>& spans) {
  ojson arr = ojson::array();
  for (const Span& s : spans) {
    ojson o;
    o["text"] = s.text;
    if (s.char_start) o["start"] = *s.char_start;
    if (s.char_end) o["end"] = *s.char_end;
    arr.push_back(std::move(o));
  }
  return arr;
}

}  // namespace

std::string serialize_post(const Post& post) {
  ojson o;
  o["id"] = post.id;
  o["title"] = post.title ? ojson(*post.title) : ojson(nullptr);
  o["body"] = post.body;
  o["label"] = to_string(post.label);
  o["cm_spans"] = spans_json(post.cm_spans);
  o["si_spans"] = spans_json(post.si_spans);
  ojson tags = ojson::array();
  for (const StrategyTag& t : post.strategy_tags) {
    tags.push_back({{"composition", t.composition},
                    {"strategy", to_string(t.strategy)}});
  }
  o["strategy_tags"] = std::move(tags);
  o["provenance"] = to_string(post.provenance);
  o["split"] = post.split ? ojson(to_string(*post.split)) : ojson(nullptr);
  return o.dump();
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const Post& p : corpus.posts) {
    out += serialize_post(p);
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  io::write_file(path, serialize_corpus(corpus));
}

std::size_t word_count(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char32_t cp : unicode::decode_utf8(text)) {
    if (unicode::is_white_space(cp)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport r;
  std::size_t words = 0;
  for (const Post& p : corpus.posts) {
    ++r.total;
    const bool sh = p.label == Label::SelfHarm;
    ++(sh ? r.self_harm : r.non_self_harm);
    ++(has_emoji(p) ? r.with_emoji : r.without_emoji);
    ++(p.provenance == Provenance::Original ? r.original : r.synthetic);
    words += word_count(p.body) + (p.title ? word_count(*p.title) : 0);
    if (!p.cm_spans.empty()) ++(sh ? r.sh_with_cm : r.nsh_with_cm);
    if (!p.si_spans.empty()) ++(sh ? r.sh_with_si : r.nsh_with_si);
  }
  if (r.total > 0) {
    r.average_words = static_cast<double>(words) / static_cast<double>(r.total);
    r.average_defined = true;
  }
  return r;
}

namespace {

using Ranges = std::vector<std::pair<std::size_t, std::size_t>>;

Ranges all_ranges(const std::vector<Span>& spans, std::string_view body) {
  Ranges out;
  for (const Span& s : spans) {
    const Ranges r = span_ranges(s, body);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

bool intersects(const Ranges& ranges, std::size_t begin, std::size_t end) {
  return std::any_of(ranges.begin(), ranges.end(), [&](const auto& r) {
    return begin < r.second && r.first < end;
  });
}

}  // namespace

EmojiContextReport emoji_context_report(const Corpus& corpus,
                                        const Lexicon* lexicon,
                                        Adjacency adjacency) {
  EmojiContextReport report;
  for (const Post& post : corpus.posts) {
    const bool sh = post.label == Label::SelfHarm;
    const Ranges cm = all_ranges(post.cm_spans, post.body);
    const Ranges si = all_ranges(post.si_spans, post.body);

    const auto entry = [&](std::string_view glyph) -> EmojiCounts& {
      EmojiCounts& c = report.per_emoji[lexicon_key(glyph)];
      if (lexicon != nullptr && lexicon->lookup(glyph) != nullptr) {
        c.in_lexicon = true;
      }
      return c;
    };

    if (post.title) {
      for (const Token& t : emoji_tokens(*post.title)) {
        ++(sh ? entry(t.text).in_sh_posts : entry(t.text).in_nsh_posts);
      }
    }
    for (const Token& t : emoji_tokens(post.body)) {
      EmojiCounts& c = entry(t.text);
      ++(sh ? c.in_sh_posts : c.in_nsh_posts);
      if (intersects(cm, t.char_start, t.char_end)) ++c.in_cm_spans;
      if (intersects(si, t.char_start, t.char_end)) ++c.in_si_spans;
    }

    if (!post.strategy_tags.empty()) {
      const auto comps = compositions(post.body, adjacency);
      for (const StrategyTag& tag : post.strategy_tags) {
        if (tag.composition >= comps.size()) continue;
        const EmojiComposition& comp = comps[tag.composition];
        auto& row = report.strategy.counts[static_cast<std::size_t>(tag.strategy)];
        if (intersects(si, comp.char_start, comp.char_end)) row[0] += comp.size();
        if (intersects(cm, comp.char_start, comp.char_end)) row[1] += comp.size();
      }
    }
  }
  report.compositions = composition_histogram(corpus.posts, adjacency);
  return report;
}

std::size_t round_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::nearbyint(fraction * static_cast<double>(n)));
}

SplitResult split_corpus(const Corpus& corpus, double test_fraction,
                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<bool> in_test(corpus.posts.size(), false);
  for (Label label : {Label::SelfHarm, Label::NonSelfHarm}) {
    std::vector<std::size_t> stratum;
    for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
      const Post& p = corpus.posts[i];
      if (p.provenance == Provenance::Original && p.label == label) {
        stratum.push_back(i);
      }
    }
    rng.shuffle(std::span(stratum));
    const std::size_t n_test = round_count(test_fraction, stratum.size());
    for (std::size_t k = 0; k < n_test; ++k) in_test[stratum[k]] = true;
  }

  SplitResult out;
  out.train.schema_version = out.test.schema_version = corpus.schema_version;
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    Post p = corpus.posts[i];
    p.split = in_test[i] ? Split::Test : Split::Train;
    (in_test[i] ? out.test : out.train).posts.push_back(std::move(p));
  }
  if (out.train.posts.empty() || out.test.posts.empty()) {
    throw Error(Errc::InsufficientPosts,
                "split leaves " + std::string(out.test.posts.empty() ? "test" : "train") +
                    " empty (" + std::to_string(corpus.posts.size()) + " posts)");
  }
  return out;
}

namespace {

bool tokens_merge(std::string_view left, std::string_view right) {
  const std::string joined = std::string(left) + std::string(right);
  return segment(joined).size() != 2;
}

struct PlainToken {
  TokenKind kind;
  std::string text;
};

// Multiset of emoji plus the word and punctuation token sequence.
struct TokenSignature {
  std::vector<std::string> emoji;
  std::vector<std::string> rest;

  friend bool operator==(const TokenSignature&, const TokenSignature&) = default;
};

TokenSignature signature(std::string_view text) {
  TokenSignature sig;
  for (const Token& t : segment(text)) {
    if (t.kind == TokenKind::Emoji) {
      sig.emoji.emplace_back(t.text);
    } else if (t.kind != TokenKind::Whitespace) {
      sig.rest.emplace_back(t.text);
    }
  }
  std::sort(sig.emoji.begin(), sig.emoji.end());
  return sig;
}

}  // namespace

std::string shuffle_emoji_positions(std::string_view text, Rng& rng) {
  std::vector<std::string> emoji;
  std::vector<PlainToken> rest;
  for (const Token& t : segment(text)) {
    if (t.kind == TokenKind::Emoji) {
      emoji.emplace_back(t.text);
    } else if (t.kind == TokenKind::Whitespace && !rest.empty() &&
               rest.back().kind == TokenKind::Whitespace) {
      // Whitespace on both sides of a removed emoji becomes one run.
      rest.back().text += t.text;
    } else {
      rest.push_back({t.kind, std::string(t.text)});
    }
  }
  if (emoji.empty()) return std::string(text);

  const std::size_t m = rest.size();
  std::vector<std::size_t> slots;
  std::vector<std::size_t> glue;  // slots that must stay separated
  for (std::size_t i = 0; i <= m; ++i) {
    const bool edge = i == 0 || i == m;
    if (edge || rest[i - 1].kind == TokenKind::Word ||
        rest[i].kind == TokenKind::Word) {
      slots.push_back(i);
    }
    if (!edge && tokens_merge(rest[i - 1].text, rest[i].text)) glue.push_back(i);
  }

  rng.shuffle(std::span(emoji));
  std::vector<std::vector<std::string>> placed(m + 1);
  std::size_t next = 0;
  for (std::size_t slot : glue) {
    if (next < emoji.size()) placed[slot].push_back(emoji[next++]);
  }
  for (; next < emoji.size(); ++next) {
    placed[slots[rng.uniform_index(slots.size())]].push_back(emoji[next]);
  }

  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i <= m; ++i) {
    for (const std::string& e : placed[i]) out += e;
    if (i < m) out += rest[i].text;
  }
  return out;
}

PerturbResult perturb(const Corpus& corpus, PerturbMode mode, double fraction,
                      std::uint64_t seed, const Lexicon* lexicon) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(Errc::InvalidArgument, "fraction must lie in (0, 1]");
  }
  if (mode == PerturbMode::ReplaceRandom && (lexicon == nullptr || lexicon->empty())) {
    throw Error(Errc::InvalidArgument, "random replacement needs a non-empty lexicon");
  }
  std::vector<std::size_t> bearing;
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    if (has_emoji(corpus.posts[i])) bearing.push_back(i);
  }
  if (bearing.empty()) {
    throw Error(Errc::EmptySelection, "no post contains an emoji");
  }

  Rng rng(seed);
  rng.shuffle(std::span(bearing));
  bearing.resize(round_count(fraction, bearing.size()));
  std::sort(bearing.begin(), bearing.end());

  PerturbResult out;
  out.corpus = corpus;
  for (std::size_t idx : bearing) {
    Post& post = out.corpus.posts[idx];
    const Post& original = corpus.posts[idx];

    if (mode == PerturbMode::ShufflePositions) {
      constexpr int kAttempts = 32;
      for (int attempt = 0; attempt < kAttempts; ++attempt) {
        Post candidate = original;
        if (candidate.title) {
          candidate.title = shuffle_emoji_positions(*original.title, rng);
        }
        candidate.body = shuffle_emoji_positions(original.body, rng);
        const bool kept =
            signature(candidate.body) == signature(original.body) &&
            (!original.title ||
             signature(*candidate.title) == signature(*original.title));
        if (!kept) continue;
        post = std::move(candidate);
        if (post.body != original.body || post.title != original.title) break;
      }
      post.strategy_tags.clear();
    } else {
      const auto& entries = lexicon->entries();
      const auto replace = [&](std::string_view text) {
        std::string result;
        for (const Token& t : segment(text)) {
          if (t.kind == TokenKind::Emoji) {
            result += entries[rng.uniform_index(entries.size())].glyph;
          } else {
            result += t.text;
          }
        }
        return result;
      };
      if (post.title) post.title = replace(*original.title);
      post.body = replace(original.body);
    }
    for (auto* spans : {&post.cm_spans, &post.si_spans}) {
      for (Span& s : *spans) {
        s.char_start.reset();
        s.char_end.reset();
      }
    }
    out.modified_ids.push_back(post.id);
  }
  return out;
}

}  // namespace emocue
