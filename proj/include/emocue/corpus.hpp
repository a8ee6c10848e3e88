#pragma once

// Annotated post corpus (JSONL, one post per line).
//
//   {"id": "p17",
//    "title": "optional title" | null,
//    "body": "post text",
//    "label": "self-harm" | "non-self-harm",
//    "cm_spans": ["text" | {"text": "...", "start": 3, "end": 10}],
//    "si_spans": [...],
//    "strategy_tags": [{"composition": 0, "strategy": "direct" |
//                       "metaphorical" | "semantic_list"}],
//    "provenance": "original" | "synthetic",
//    "split": "train" | "test" | null}
//
// Span offsets are code point offsets into body. strategy_tags index the
// emoji compositions of body in order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emocue/emojitext.hpp"
#include "emocue/label.hpp"
#include "emocue/random.hpp"

namespace emocue {

class Lexicon;

inline constexpr std::size_t kMaxSpansPerCategory = 3;

struct Span {
  std::string text;
  std::optional<std::size_t> char_start;
  std::optional<std::size_t> char_end;

  friend bool operator==(const Span&, const Span&) = default;
};

enum class Strategy { Direct, Metaphorical, SemanticList };
std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

struct StrategyTag {
  std::size_t composition = 0;
  Strategy strategy = Strategy::Direct;

  friend bool operator==(const StrategyTag&, const StrategyTag&) = default;
};

enum class Provenance { Original, Synthetic };
enum class Split { Train, Test };
std::string_view to_string(Provenance p);
std::string_view to_string(Split s);

struct Post {
  std::string id;
  std::optional<std::string> title;
  std::string body;
  Label label = Label::NonSelfHarm;
  std::vector<Span> cm_spans;
  std::vector<Span> si_spans;
  std::vector<StrategyTag> strategy_tags;
  Provenance provenance = Provenance::Original;
  std::optional<Split> split;

  friend bool operator==(const Post&, const Post&) = default;
};

inline constexpr std::string_view kCorpusSchemaVersion = "1";

struct Corpus {
  std::vector<Post> posts;
  std::string schema_version{kCorpusSchemaVersion};

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Code point ranges in body where the span occurs: its offsets when
/// present, otherwise every non-overlapping occurrence of its text.
std::vector<std::pair<std::size_t, std::size_t>> span_ranges(
    const Span& span, std::string_view body);

/// Title and body joined with a newline (body alone without a title).
std::string post_text(const Post& post);

bool has_emoji(const Post& post);

enum class Severity { Warning, Error };

struct Issue {
  std::size_t line = 0;
  std::string field;
  std::string reason;
  Severity severity = Severity::Error;
};

/// Invariant check of one post (line left 0).
std::vector<Issue> validate_post(const Post& post);

enum class LoadMode {
  /// Any error-level issue aborts the load (all issues are still listed in
  /// the thrown message).
  Strict,
  /// Invalid rows are dropped and their issues kept.
  Lenient,
};

struct CorpusLoad {
  Corpus corpus;
  std::vector<Issue> issues;
  std::size_t dropped = 0;
};

/// Throws FileNotFound; in strict mode ParseError(line) or
/// SchemaViolation(line).
CorpusLoad load_corpus(const std::filesystem::path& path,
                       LoadMode mode = LoadMode::Strict);
CorpusLoad parse_corpus(std::string_view jsonl, LoadMode mode = LoadMode::Strict);

std::string serialize_post(const Post& post);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct StatsReport {
  std::size_t total = 0;
  std::size_t self_harm = 0;
  std::size_t non_self_harm = 0;
  std::size_t with_emoji = 0;
  std::size_t without_emoji = 0;
  std::size_t original = 0;
  std::size_t synthetic = 0;
  /// Whitespace-delimited words over title and body; 0 for an empty corpus
  /// with average_defined = false.
  double average_words = 0.0;
  bool average_defined = false;
  std::size_t sh_with_cm = 0;
  std::size_t sh_with_si = 0;
  std::size_t nsh_with_cm = 0;
  std::size_t nsh_with_si = 0;
};

std::size_t word_count(std::string_view text);
StatsReport corpus_stats(const Corpus& corpus);

struct EmojiCounts {
  std::size_t in_cm_spans = 0;
  std::size_t in_si_spans = 0;
  std::size_t in_sh_posts = 0;
  std::size_t in_nsh_posts = 0;
  bool in_lexicon = false;
};

struct StrategyIntentCounts {
  // emoji occurrences by [strategy][0 = serious intent, 1 = casual mention]
  std::array<std::array<std::size_t, 2>, 3> counts{};
};

struct EmojiContextReport {
  /// Keyed by lexicon key (NFC, no FE0F).
  std::map<std::string, EmojiCounts> per_emoji;
  StrategyIntentCounts strategy;
  CompositionHistogram compositions;
};

/// Emoji occurrence counts by context. An emoji is inside a span when its
/// code point range intersects one of the span's ranges; span membership is
/// only defined for body emoji. SH/NSH counts include title emoji. Strategy
/// counts take each tagged body composition and add its emoji to the intent
/// of every span category it intersects.
EmojiContextReport emoji_context_report(
    const Corpus& corpus, const Lexicon* lexicon,
    Adjacency adjacency = Adjacency::WhitespaceTolerant);

/// Round half to even of fraction * n.
std::size_t round_count(double fraction, std::size_t n);

struct SplitResult {
  Corpus train;
  Corpus test;
};

/// Stratified by label over original posts; every synthetic post is in
/// train. Output posts keep corpus order and get `split` set. Throws
/// InvalidArgument or InsufficientPosts.
SplitResult split_corpus(const Corpus& corpus, double test_fraction,
                         std::uint64_t seed);

enum class PerturbMode { ShufflePositions, ReplaceRandom };
std::string_view to_string(PerturbMode mode);
std::optional<PerturbMode> parse_perturb_mode(std::string_view text);

struct PerturbResult {
  Corpus corpus;
  std::vector<std::string> modified_ids;
};

/// Rewrites round_count(fraction, n) of the n emoji-bearing posts. Throws
/// InvalidArgument or EmptySelection.
PerturbResult perturb(const Corpus& corpus, PerturbMode mode, double fraction,
                      std::uint64_t seed, const Lexicon* lexicon);

/// Moves the emoji of `text` to random word boundaries. Every non-emoji
/// character keeps its order; whitespace on both sides of a moved emoji is
/// joined into one run. Exposed for testing.
std::string shuffle_emoji_positions(std::string_view text, Rng& rng);

}  // namespace emocue
