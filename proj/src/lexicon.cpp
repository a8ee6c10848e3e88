#include "emocue/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "emocue/error.hpp"
#include "emocue/io.hpp"
#include "emocue/unicode.hpp"

namespace emocue {

using nlohmann::json;

std::string_view to_string(ChanceLevel level) {
  switch (level) {
    case ChanceLevel::Low: return "Low";
    case ChanceLevel::Medium: return "Medium";
    case ChanceLevel::High: return "High";
  }
  return "Low";
}

std::optional<ChanceLevel> parse_chance(std::string_view text) {
  std::string lower;
  for (char c : text) {
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "low") return ChanceLevel::Low;
  if (lower == "medium") return ChanceLevel::Medium;
  if (lower == "high") return ChanceLevel::High;
  return std::nullopt;
}

LexiconFormat format_for_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  return (ext == ".tsv" || ext == ".tab") ? LexiconFormat::Tsv
                                          : LexiconFormat::Json;
}

std::string lexicon_key(std::string_view glyph) {
  std::u32string cps = unicode::decode_utf8(unicode::nfc(glyph));
  std::erase(cps, unicode::kVs16);
  return unicode::encode_utf8(cps);
}

namespace {

std::string trim(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return b < e ? std::string(b, e) : std::string();
}

// Returns an Errc name and message when the entry breaks an invariant.
std::optional<LexiconFinding> check_entry(const EmojiEntry& e) {
  if (!unicode::is_valid_utf8(e.glyph)) {
    return LexiconFinding{0, "InvalidUtf8", "glyph is not valid UTF-8"};
  }
  const std::u32string cps = unicode::decode_utf8(e.glyph);
  if (cps.empty()) {
    return LexiconFinding{0, "SchemaViolation", "empty glyph"};
  }
  if (unicode::grapheme_boundaries(cps).size() != 2) {
    return LexiconFinding{0, "MultiGrapheme",
                          "glyph '" + e.glyph + "' is more than one grapheme"};
  }
  for (char32_t cp : cps) {
    if (!unicode::has_emoji_property(cp)) {
      return LexiconFinding{0, "SchemaViolation",
                            "glyph '" + e.glyph + "' is not an emoji"};
    }
  }
  if (trim(e.usual_meaning).empty()) {
    return LexiconFinding{0, "SchemaViolation",
                          "empty usual_meaning for '" + e.glyph + "'"};
  }
  if (trim(e.contextual_meaning).empty()) {
    return LexiconFinding{0, "SchemaViolation",
                          "empty contextual_meaning for '" + e.glyph + "'"};
  }
  return std::nullopt;
}

Errc errc_from_name(std::string_view kind) {
  if (kind == "MultiGrapheme") return Errc::MultiGrapheme;
  if (kind == "InvalidUtf8") return Errc::InvalidUtf8;
  if (kind == "DuplicateGlyph") return Errc::DuplicateGlyph;
  if (kind == "InvalidChance") return Errc::InvalidChance;
  if (kind == "ParseError") return Errc::ParseError;
  return Errc::SchemaViolation;
}

// A row as read from disk, before chance levels are parsed.
struct RawRow {
  std::size_t line = 0;
  std::string glyph;
  std::string usual;
  std::string contextual;
  std::string cm;
  std::string si;
};

struct RawTable {
  std::vector<RawRow> rows;
  std::string version;
  std::vector<LexiconFinding> findings;  // structural problems
};

constexpr std::string_view kTsvHeader =
    "emoji\tusual_meaning\tcontextual_meaning\tcm_chance\tsi_chance";

RawTable read_tsv(std::string_view content) {
  RawTable table;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string line(content.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string body = trim(std::string_view(line).substr(1));
      if (body.rfind("version:", 0) == 0) table.version = trim(body.substr(8));
      continue;
    }
    if (!seen_header) {
      seen_header = true;
      if (line != kTsvHeader) {
        table.findings.push_back({line_no, "ParseError",
                                  "expected header '" +
                                      std::string(kTsvHeader) + "'"});
      }
      continue;
    }
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos
                                            ? std::string::npos
                                            : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 5) {
      table.findings.push_back(
          {line_no, "ParseError",
           "expected 5 tab-separated columns, found " +
               std::to_string(cols.size())});
      continue;
    }
    table.rows.push_back({line_no, trim(cols[0]), trim(cols[1]), trim(cols[2]),
                          trim(cols[3]), trim(cols[4])});
  }
  return table;
}

// Line numbers of the objects that make up the entry array, in order.
std::vector<std::size_t> element_lines(std::string_view text,
                                       std::size_t element_depth) {
  std::vector<std::size_t> lines;
  std::size_t depth = 0;
  std::size_t line = 1;
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      if (c == '{' && depth == element_depth) lines.push_back(line);
      ++depth;
    } else if (c == '}' || c == ']') {
      if (depth > 0) --depth;
    }
  }
  return lines;
}

RawTable read_json(std::string_view content) {
  RawTable table;
  if (trim(content).empty()) return table;
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what(), io::line_of(content, e.byte));
  }
  const json* entries = &doc;
  std::size_t depth = 1;
  if (doc.is_object()) {
    if (doc.contains("version") && doc["version"].is_string()) {
      table.version = doc["version"].get<std::string>();
    }
    if (!doc.contains("entries")) {
      throw Error(Errc::ParseError, "object form needs an 'entries' array", 1);
    }
    entries = &doc["entries"];
    depth = 2;
  }
  if (!entries->is_array()) {
    throw Error(Errc::ParseError, "lexicon JSON must be an array of objects", 1);
  }
  const std::vector<std::size_t> lines = element_lines(content, depth);
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const json& obj = (*entries)[i];
    const std::size_t line = i < lines.size() ? lines[i] : 0;
    if (!obj.is_object()) {
      table.findings.push_back({line, "ParseError", "entry is not an object"});
      continue;
    }
    RawRow row;
    row.line = line;
    bool ok = true;
    const auto field = [&](const char* key, std::string& dst) {
      if (!obj.contains(key) || !obj[key].is_string()) {
        table.findings.push_back(
            {line, "ParseError", std::string("missing string field '") + key + "'"});
        ok = false;
        return;
      }
      dst = trim(obj[key].get<std::string>());
    };
    field("emoji", row.glyph);
    field("usual_meaning", row.usual);
    field("contextual_meaning", row.contextual);
    field("cm_chance", row.cm);
    field("si_chance", row.si);
    if (ok) table.rows.push_back(std::move(row));
  }
  return table;
}

RawTable read_raw(std::string_view content, LexiconFormat format) {
  return format == LexiconFormat::Tsv ? read_tsv(content) : read_json(content);
}

// Converts rows, appending findings for bad chance levels, entry invariant
// violations and duplicates. Rows with findings are skipped.
std::vector<EmojiEntry> convert_rows(const std::vector<RawRow>& rows,
                                     std::vector<LexiconFinding>& findings) {
  std::vector<EmojiEntry> entries;
  std::unordered_set<std::string> seen;
  for (const RawRow& row : rows) {
    const auto cm = parse_chance(row.cm);
    const auto si = parse_chance(row.si);
    if (!cm || !si) {
      findings.push_back({row.line, "InvalidChance",
                          "invalid chance level '" + (cm ? row.si : row.cm) +
                              "' (expected Low, Medium or High)"});
      continue;
    }
    EmojiEntry entry{row.glyph, row.usual, row.contextual, *cm, *si};
    if (auto bad = check_entry(entry)) {
      bad->line = row.line;
      findings.push_back(*bad);
      continue;
    }
    if (!seen.insert(lexicon_key(entry.glyph)).second) {
      findings.push_back(
          {row.line, "DuplicateGlyph", "duplicate glyph '" + entry.glyph + "'"});
      continue;
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string count_warning(std::size_t n) {
  return "lexicon has " + std::to_string(n) + " entries; the canonical matrix has " +
         std::to_string(kCanonicalLexiconSize);
}

}  // namespace

Lexicon::Lexicon(std::vector<EmojiEntry> entries, std::string source_path,
                 std::string version)
    : entries_(std::move(entries)),
      source_path_(std::move(source_path)),
      version_(std::move(version)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (auto bad = check_entry(entries_[i])) {
      throw Error(errc_from_name(bad->kind), bad->message);
    }
    if (!index_.emplace(lexicon_key(entries_[i].glyph), i).second) {
      throw Error(Errc::DuplicateGlyph,
                  "duplicate glyph '" + entries_[i].glyph + "'");
    }
  }
}

const EmojiEntry* Lexicon::lookup(std::string_view glyph) const {
  const std::u32string cps = unicode::decode_utf8(glyph);
  if (unicode::grapheme_boundaries(cps).size() != 2) {
    throw Error(Errc::MultiGrapheme,
                "lookup expects exactly one grapheme, got '" +
                    std::string(glyph) + "'");
  }
  const auto it = index_.find(lexicon_key(glyph));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

LexiconLoad parse_lexicon(std::string_view content, LexiconFormat format,
                          std::string source_path) {
  RawTable table = read_raw(content, format);
  if (!table.findings.empty()) {
    const LexiconFinding& f = table.findings.front();
    throw Error(Errc::ParseError, f.message, f.line);
  }
  std::vector<LexiconFinding> findings;
  std::vector<EmojiEntry> entries = convert_rows(table.rows, findings);
  if (!findings.empty()) {
    const LexiconFinding& f = findings.front();
    throw Error(errc_from_name(f.kind), f.message, f.line);
  }
  LexiconLoad out{Lexicon(std::move(entries), std::move(source_path),
                          table.version.empty() ? "unversioned" : table.version),
                  {}};
  if (out.lexicon.size() != kCanonicalLexiconSize) {
    out.warnings.push_back(count_warning(out.lexicon.size()));
  }
  return out;
}

LexiconLoad load_lexicon(const std::filesystem::path& path,
                         LexiconFormat format) {
  return parse_lexicon(io::read_file(path), format, path.string());
}

LexiconLoad load_lexicon(const std::filesystem::path& path) {
  return load_lexicon(path, format_for_path(path));
}

std::string serialize_lexicon(const Lexicon& lexicon, LexiconFormat format) {
  if (format == LexiconFormat::Json) {
    json arr = json::array();
    for (const EmojiEntry& e : lexicon.entries()) {
      arr.push_back({{"emoji", e.glyph},
                     {"usual_meaning", e.usual_meaning},
                     {"contextual_meaning", e.contextual_meaning},
                     {"cm_chance", to_string(e.cm_chance)},
                     {"si_chance", to_string(e.si_chance)}});
    }
    if (lexicon.version().empty() || lexicon.version() == "unversioned") {
      return arr.dump(2) + "\n";
    }
    json doc = json::object();
    doc["version"] = lexicon.version();
    doc["entries"] = std::move(arr);
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  if (!lexicon.version().empty() && lexicon.version() != "unversioned") {
    out << "# version: " << lexicon.version() << '\n';
  }
  out << kTsvHeader << '\n';
  for (const EmojiEntry& e : lexicon.entries()) {
    out << e.glyph << '\t' << e.usual_meaning << '\t' << e.contextual_meaning
        << '\t' << to_string(e.cm_chance) << '\t' << to_string(e.si_chance)
        << '\n';
  }
  return out.str();
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path,
                  LexiconFormat format) {
  io::write_file(path, serialize_lexicon(lexicon, format));
}

namespace {

void tally(ChanceDistribution& d, ChanceLevel level) {
  switch (level) {
    case ChanceLevel::Low: ++d.low; break;
    case ChanceLevel::Medium: ++d.medium; break;
    case ChanceLevel::High: ++d.high; break;
  }
}

}  // namespace

ValidationReport validate_lexicon(const std::vector<EmojiEntry>& entries) {
  ValidationReport report;
  report.entry_count = entries.size();
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const EmojiEntry& e = entries[i];
    tally(report.cm, e.cm_chance);
    tally(report.si, e.si_chance);
    if (auto bad = check_entry(e)) {
      bad->message = "entry " + std::to_string(i + 1) + ": " + bad->message;
      report.violations.push_back(*bad);
      continue;
    }
    if (!seen.insert(lexicon_key(e.glyph)).second) {
      report.violations.push_back({0, "DuplicateGlyph",
                                   "entry " + std::to_string(i + 1) +
                                       ": duplicate glyph '" + e.glyph + "'"});
    }
  }
  if (entries.size() != kCanonicalLexiconSize) {
    report.warnings.push_back(count_warning(entries.size()));
  }
  return report;
}

ValidationReport validate_lexicon(const Lexicon& lexicon) {
  return validate_lexicon(lexicon.entries());
}

ValidationReport validate_lexicon_file(const std::filesystem::path& path,
                                       LexiconFormat format) {
  const std::string content = io::read_file(path);
  ValidationReport report;
  RawTable table;
  try {
    table = read_raw(content, format);
  } catch (const Error& e) {
    report.violations.push_back(
        {e.line().value_or(0), std::string(to_string(e.code())), e.what()});
    return report;
  }
  report.violations = table.findings;
  std::vector<LexiconFinding> findings;
  const std::vector<EmojiEntry> entries = convert_rows(table.rows, findings);
  report.violations.insert(report.violations.end(), findings.begin(),
                           findings.end());
  report.entry_count = table.rows.size();
  for (const EmojiEntry& e : entries) {
    tally(report.cm, e.cm_chance);
    tally(report.si, e.si_chance);
  }
  if (report.entry_count != kCanonicalLexiconSize) {
    report.warnings.push_back(count_warning(report.entry_count));
  }
  return report;
}

}  // namespace emocue
