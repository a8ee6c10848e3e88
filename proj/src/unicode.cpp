#include "emocue/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uvernum.h>

#include "emocue/error.hpp"

namespace emocue::unicode {

const std::string_view kUnicodeVersion = U_UNICODE_VERSION;

namespace {

// Returns the code point starting at text[pos] and advances pos, or returns
// U+FFFFFFFF on a malformed sequence (pos left untouched).
constexpr char32_t kBad = 0xFFFFFFFF;

char32_t next_code_point(std::string_view text, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
    min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
    min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
    min = 0x10000;
  } else {
    return kBad;
  }
  if (pos + len > text.size()) return kBad;
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char cont = byte(pos + i);
    if ((cont & 0xC0) != 0x80) return kBad;
    cp = (cp << 6) | (cont & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kBad;
  pos += len;
  return cp;
}

bool is_control_like(GraphemeBreak b) {
  return b == GraphemeBreak::Control || b == GraphemeBreak::CR ||
         b == GraphemeBreak::LF;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t at = pos;
    const char32_t cp = next_code_point(text, pos);
    if (cp == kBad) {
      throw Error(Errc::InvalidUtf8,
                  "malformed UTF-8 at byte offset " + std::to_string(at));
    }
    out.push_back(cp);
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (next_code_point(text, pos) == kBad) return false;
  }
  return true;
}

std::size_t length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

GraphemeBreak grapheme_break(char32_t cp) {
  switch (u_getIntPropertyValue(static_cast<UChar32>(cp),
                                UCHAR_GRAPHEME_CLUSTER_BREAK)) {
    case U_GCB_CR: return GraphemeBreak::CR;
    case U_GCB_LF: return GraphemeBreak::LF;
    case U_GCB_CONTROL: return GraphemeBreak::Control;
    case U_GCB_EXTEND:
    case U_GCB_E_MODIFIER: return GraphemeBreak::Extend;
    case U_GCB_ZWJ: return GraphemeBreak::ZWJ;
    case U_GCB_REGIONAL_INDICATOR: return GraphemeBreak::RegionalIndicator;
    case U_GCB_PREPEND: return GraphemeBreak::Prepend;
    case U_GCB_SPACING_MARK: return GraphemeBreak::SpacingMark;
    case U_GCB_L: return GraphemeBreak::L;
    case U_GCB_V: return GraphemeBreak::V;
    case U_GCB_T: return GraphemeBreak::T;
    case U_GCB_LV: return GraphemeBreak::LV;
    case U_GCB_LVT: return GraphemeBreak::LVT;
    default: return GraphemeBreak::Other;
  }
}

bool is_extended_pictographic(char32_t cp) {
  return u_hasBinaryProperty(static_cast<UChar32>(cp),
                             UCHAR_EXTENDED_PICTOGRAPHIC);
}

bool is_regional_indicator(char32_t cp) {
  return cp >= 0x1F1E6 && cp <= 0x1F1FF;
}

bool has_emoji_property(char32_t cp) {
  const auto c = static_cast<UChar32>(cp);
  return u_hasBinaryProperty(c, UCHAR_EMOJI) ||
         u_hasBinaryProperty(c, UCHAR_EMOJI_COMPONENT) ||
         u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER) ||
         u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC);
}

bool is_emoji_presentation(char32_t cp) {
  return u_hasBinaryProperty(static_cast<UChar32>(cp),
                             UCHAR_EMOJI_PRESENTATION);
}

bool is_white_space(char32_t cp) {
  return u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_WHITE_SPACE);
}

bool is_punctuation(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)); }

bool is_word_char(char32_t cp) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (mask & (U_GC_L_MASK | U_GC_N_MASK | U_GC_M_MASK | U_GC_PC_MASK)) != 0;
}

std::vector<std::size_t> grapheme_boundaries(std::u32string_view text) {
  std::vector<std::size_t> out{0};
  if (text.empty()) return out;

  GraphemeBreak prev = grapheme_break(text[0]);
  // GB11 state: an Extended_Pictographic followed only by Extend so far.
  bool pict_run = is_extended_pictographic(text[0]);
  // GB12/13 state: length of the regional indicator run ending at prev.
  std::size_t ri_run = prev == GraphemeBreak::RegionalIndicator ? 1 : 0;
  bool prev_zwj_after_pict = false;

  for (std::size_t i = 1; i < text.size(); ++i) {
    const char32_t cp = text[i];
    const GraphemeBreak cur = grapheme_break(cp);
    const bool cur_pict = is_extended_pictographic(cp);

    bool boundary = true;
    if (prev == GraphemeBreak::CR && cur == GraphemeBreak::LF) {
      boundary = false;  // GB3
    } else if (is_control_like(prev) || is_control_like(cur)) {
      boundary = true;  // GB4, GB5
    } else if (prev == GraphemeBreak::L &&
               (cur == GraphemeBreak::L || cur == GraphemeBreak::V ||
                cur == GraphemeBreak::LV || cur == GraphemeBreak::LVT)) {
      boundary = false;  // GB6
    } else if ((prev == GraphemeBreak::LV || prev == GraphemeBreak::V) &&
               (cur == GraphemeBreak::V || cur == GraphemeBreak::T)) {
      boundary = false;  // GB7
    } else if ((prev == GraphemeBreak::LVT || prev == GraphemeBreak::T) &&
               cur == GraphemeBreak::T) {
      boundary = false;  // GB8
    } else if (cur == GraphemeBreak::Extend || cur == GraphemeBreak::ZWJ) {
      boundary = false;  // GB9
    } else if (cur == GraphemeBreak::SpacingMark) {
      boundary = false;  // GB9a
    } else if (prev == GraphemeBreak::Prepend) {
      boundary = false;  // GB9b
    } else if (prev_zwj_after_pict && cur_pict) {
      boundary = false;  // GB11
    } else if (prev == GraphemeBreak::RegionalIndicator &&
               cur == GraphemeBreak::RegionalIndicator) {
      boundary = ri_run % 2 == 0;  // GB12, GB13
    }

    if (boundary) out.push_back(i);

    prev_zwj_after_pict = cur == GraphemeBreak::ZWJ && pict_run;
    if (cur_pict) {
      pict_run = true;
    } else if (cur != GraphemeBreak::Extend) {
      pict_run = false;
    }
    ri_run = cur == GraphemeBreak::RegionalIndicator ? ri_run + 1 : 0;
    prev = cur;
  }
  out.push_back(text.size());
  return out;
}

std::vector<Grapheme> graphemes(std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  const std::vector<std::size_t> bounds = grapheme_boundaries(cps);

  // byte offset of every code point index, plus the end
  std::vector<std::size_t> byte_at;
  byte_at.reserve(cps.size() + 1);
  for (std::size_t pos = 0; pos < text.size();) {
    byte_at.push_back(pos);
    next_code_point(text, pos);
  }
  byte_at.push_back(text.size());

  std::vector<Grapheme> out;
  if (bounds.size() < 2) return out;
  out.reserve(bounds.size() - 1);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    Grapheme g;
    g.char_begin = bounds[i];
    g.char_end = bounds[i + 1];
    g.byte_begin = byte_at[g.char_begin];
    g.byte_end = byte_at[g.char_end];
    g.text = text.substr(g.byte_begin, g.byte_end - g.byte_begin);
    out.push_back(g);
  }
  return out;
}

bool is_emoji_grapheme(std::u32string_view cluster) {
  if (cluster.empty()) return false;
  bool pictographic = false;
  for (char32_t cp : cluster) {
    if (!has_emoji_property(cp)) return false;
    if (cp == kVs16 || cp == kKeycap || cp == kZwj ||
        is_regional_indicator(cp) || is_emoji_presentation(cp)) {
      pictographic = true;
    } else if (cp >= 0x2190 &&
               u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_EMOJI)) {
      // text-presentation symbols such as U+2764 are written without FE0F
      // in practice; ASCII digits, (c), (R), TM and the like are not.
      pictographic = true;
    }
  }
  return pictographic;
}

bool is_emoji_grapheme(std::string_view cluster_utf8) {
  return is_emoji_grapheme(decode_utf8(cluster_utf8));
}

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(Errc::Io, std::string("ICU NFC unavailable: ") +
                              u_errorName(status));
  }
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) {
    throw Error(Errc::InvalidUtf8, std::string("NFC normalization failed: ") +
                                       u_errorName(status));
  }
  std::string out;
  dst.toUTF8String(out);
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = next_code_point(text, pos);
    if (cp == kBad) {
      throw Error(Errc::InvalidUtf8, "malformed UTF-8 in to_lower");
    }
    append_utf8(out, static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp))));
  }
  return out;
}

}  // namespace emocue::unicode
