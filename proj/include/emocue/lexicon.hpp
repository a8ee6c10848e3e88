#pragma once

// Contextual emoji sensitivity matrix: one row per emoji with its usual
// meaning, its meaning in self-harm discourse and how likely it is to show
// up in casual-mention and serious-intent contexts.
//
// On-disk formats
//   JSON: an array of objects with keys emoji, usual_meaning,
//         contextual_meaning, cm_chance, si_chance. An object
//         {"version": ..., "entries": [...]} is accepted as well.
//   TSV:  header `emoji\tusual_meaning\tcontextual_meaning\tcm_chance\tsi_chance`
//         then one row per entry. Lines starting with '#' are comments;
//         `# version: <text>` sets the version.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emocue {

enum class ChanceLevel { Low = 0, Medium = 1, High = 2 };

std::string_view to_string(ChanceLevel level);
/// Case-insensitive; exactly "low", "medium" or "high".
std::optional<ChanceLevel> parse_chance(std::string_view text);

struct EmojiEntry {
  std::string glyph;
  std::string usual_meaning;
  std::string contextual_meaning;
  ChanceLevel cm_chance = ChanceLevel::Low;
  ChanceLevel si_chance = ChanceLevel::Low;

  friend bool operator==(const EmojiEntry&, const EmojiEntry&) = default;
};

enum class LexiconFormat { Json, Tsv };

/// Guesses from the extension (.tsv/.tab -> Tsv, anything else -> Json).
LexiconFormat format_for_path(const std::filesystem::path& path);

inline constexpr std::size_t kCanonicalLexiconSize = 100;

/// Lookup key: NFC with every U+FE0F removed. The stored glyph keeps its
/// original encoding.
std::string lexicon_key(std::string_view glyph);

/// Immutable after construction; lookups are safe from any thread.
class Lexicon {
 public:
  Lexicon() = default;

  /// Checks every entry invariant; throws DuplicateGlyph, MultiGrapheme or
  /// SchemaViolation.
  Lexicon(std::vector<EmojiEntry> entries, std::string source_path = {},
          std::string version = {});

  const std::vector<EmojiEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& source_path() const noexcept { return source_path_; }
  const std::string& version() const noexcept { return version_; }

  /// Throws Error(MultiGrapheme) unless `glyph` is a single cluster.
  const EmojiEntry* lookup(std::string_view glyph) const;

 private:
  std::vector<EmojiEntry> entries_;
  std::string source_path_;
  std::string version_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LexiconLoad {
  Lexicon lexicon;
  std::vector<std::string> warnings;
};

/// Throws FileNotFound, ParseError(line), DuplicateGlyph or InvalidChance.
LexiconLoad load_lexicon(const std::filesystem::path& path,
                         LexiconFormat format);
LexiconLoad load_lexicon(const std::filesystem::path& path);
LexiconLoad parse_lexicon(std::string_view content, LexiconFormat format,
                          std::string source_path = {});

std::string serialize_lexicon(const Lexicon& lexicon, LexiconFormat format);
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path,
                  LexiconFormat format);

struct LexiconFinding {
  std::size_t line = 0;  // 0 when not tied to a line
  std::string kind;      // an Errc name
  std::string message;
};

struct ChanceDistribution {
  std::size_t low = 0;
  std::size_t medium = 0;
  std::size_t high = 0;
};

struct ValidationReport {
  std::size_t entry_count = 0;
  std::vector<LexiconFinding> violations;
  std::vector<std::string> warnings;
  ChanceDistribution cm;
  ChanceDistribution si;

  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_lexicon(const std::vector<EmojiEntry>& entries);
ValidationReport validate_lexicon(const Lexicon& lexicon);

/// Reads leniently and reports every problem instead of stopping at the
/// first one. Missing files are still thrown.
ValidationReport validate_lexicon_file(const std::filesystem::path& path,
                                       LexiconFormat format);

}  // namespace emocue
