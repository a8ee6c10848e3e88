#include "emocue/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "emocue/error.hpp"
#include "emocue/unicode.hpp"

namespace emocue {

using ojson = nlohmann::ordered_json;

namespace {

bool dropped_in_tokens(char32_t cp) {
  if (unicode::is_punctuation(cp)) return true;
  // ASCII symbols: $ + < = > ^ ` | ~
  return cp < 0x80 && std::string_view("$+<=>^`|~").find(static_cast<char>(cp)) !=
                          std::string_view::npos;
}

std::vector<std::string> split_whitespace(std::u32string_view cps) {
  std::vector<std::string> out;
  std::string current;
  for (char32_t cp : cps) {
    if (unicode::is_white_space(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      unicode::append_utf8(current, cp);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace

std::vector<std::string> span_tokens(std::string_view text,
                                     const TokenizeOptions& options) {
  std::u32string kept;
  for (char32_t cp : unicode::decode_utf8(unicode::to_lower(text))) {
    if (!dropped_in_tokens(cp)) kept.push_back(cp);
  }
  std::vector<std::string> tokens = split_whitespace(kept);
  if (options.remove_articles) {
    std::erase_if(tokens, [](const std::string& t) {
      return t == "a" || t == "an" || t == "the";
    });
  }
  return tokens;
}

TokenScore token_scores(std::string_view pred, std::string_view gold,
                        const TokenizeOptions& options) {
  const auto p = span_tokens(pred, options);
  const auto g = span_tokens(gold, options);
  if (p.empty() && g.empty()) return {1.0, 1.0, 1.0};
  if (p.empty() || g.empty()) return {0.0, 0.0, 0.0};

  std::unordered_map<std::string, std::size_t> gold_counts;
  for (const auto& t : g) ++gold_counts[t];
  std::size_t overlap = 0;
  for (const auto& t : p) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return {0.0, 0.0, 0.0};
  TokenScore s;
  s.precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  s.recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double token_f1(std::string_view pred, std::string_view gold,
                const TokenizeOptions& options) {
  return token_scores(pred, gold, options).f1;
}

double span_set_f1(const std::vector<std::string>& preds,
                   const std::vector<std::string>& golds,
                   const TokenizeOptions& options) {
  if (preds.empty() && golds.empty()) return 1.0;
  if (preds.empty() || golds.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : preds) {
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, token_f1(p, g, options));
    sum += best;
  }
  return sum / static_cast<double>(preds.size());
}

namespace {

double class_f1(const std::vector<Label>& preds, const std::vector<Label>& golds,
                Label positive) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == positive;
    const bool g = golds[i] == positive;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  const double precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
  const double recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double classification_f1(const std::vector<Label>& preds,
                         const std::vector<Label>& golds, Label positive,
                         bool macro) {
  if (preds.size() != golds.size()) {
    throw Error(Errc::LengthMismatch,
                std::to_string(preds.size()) + " predictions vs " +
                    std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw Error(Errc::EmptyInput, "no labels to score");
  if (!macro) return class_f1(preds, golds, positive);
  return (class_f1(preds, golds, Label::SelfHarm) +
          class_f1(preds, golds, Label::NonSelfHarm)) /
         2.0;
}

std::string join_spans(const std::vector<std::string>& cm_spans,
                       const std::vector<std::string>& si_spans) {
  std::string out;
  for (const auto* list : {&cm_spans, &si_spans}) {
    for (const auto& s : *list) {
      if (!out.empty()) out += ' ';
      out += s;
    }
  }
  return out;
}

int relevance(std::string_view rationale, const std::vector<std::string>& cm_spans,
              const std::vector<std::string>& si_spans) {
  const std::string haystack = unicode::to_lower(rationale);
  for (const auto* list : {&cm_spans, &si_spans}) {
    for (const auto& s : *list) {
      if (haystack.find(unicode::to_lower(s)) == std::string::npos) return 0;
    }
  }
  return 1;
}

double tfidf_cosine(std::string_view a, std::string_view b) {
  const auto ta = span_tokens(a);
  const auto tb = span_tokens(b);
  if (ta.empty() || tb.empty()) return 0.0;

  std::map<std::string, std::pair<double, double>> tf;  // term -> counts in a, b
  for (const auto& t : ta) tf[t].first += 1.0;
  for (const auto& t : tb) tf[t].second += 1.0;

  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [term, counts] : tf) {
    const double df = (counts.first > 0.0) + (counts.second > 0.0);
    const double idf = std::log(3.0 / (1.0 + df)) + 1.0;
    const double wa = counts.first * idf;
    const double wb = counts.second * idf;
    dot += wa * wb;
    na += wa * wa;
    nb += wb * wb;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double coherence(std::string_view rationale, const std::vector<std::string>& cm_spans,
                 const std::vector<std::string>& si_spans) {
  return tfidf_cosine(join_spans(cm_spans, si_spans), rationale);
}

std::size_t count_syllables(std::string_view word) {
  std::string letters;
  for (char c : word) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc)) letters.push_back(static_cast<char>(std::tolower(uc)));
  }
  const auto vowel = [](char c) {
    return std::string_view("aeiouy").find(c) != std::string_view::npos;
  };
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : letters) {
    if (vowel(c)) {
      if (!in_group) ++groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  if (!letters.empty() && letters.back() == 'e' && groups > 1) {
    // silent only when the 'e' forms its own group
    if (letters.size() < 2 || !vowel(letters[letters.size() - 2])) --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

Readability readability(std::string_view text) {
  const std::u32string cps = unicode::decode_utf8(text);
  Readability r;
  std::size_t words_in_sentence = 0;
  std::string word;
  bool word_has_alnum = false;

  const auto end_word = [&] {
    if (word_has_alnum) {
      ++r.words;
      ++words_in_sentence;
      r.syllables += count_syllables(word);
    }
    word.clear();
    word_has_alnum = false;
  };
  const auto end_sentence = [&] {
    if (words_in_sentence > 0) ++r.sentences;
    words_in_sentence = 0;
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (unicode::is_white_space(cp)) {
      end_word();
      continue;
    }
    unicode::append_utf8(word, cp);
    if (unicode::is_word_char(cp) && cp != U'_') word_has_alnum = true;
    if ((cp == U'.' || cp == U'!' || cp == U'?') &&
        (i + 1 == cps.size() || unicode::is_white_space(cps[i + 1]))) {
      end_word();
      end_sentence();
    }
  }
  end_word();
  end_sentence();

  if (r.words == 0) throw Error(Errc::EmptyText, "readability of a text without words");
  const double words = static_cast<double>(r.words);
  r.grade = 0.39 * (words / static_cast<double>(r.sentences)) +
            11.8 * (static_cast<double>(r.syllables) / words) - 15.59;
  r.normalized = std::clamp((18.0 - r.grade) / 18.0, 0.0, 1.0);
  return r;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(Errc::InvalidArgument, "embedding dimension 0");
}

std::vector<double> HashingEmbedder::embed(std::string_view text) {
  std::vector<double> v(dimension_, 0.0);
  for (const auto& token : span_tokens(text)) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : token) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    v[h % dimension_] += 1.0;
  }
  return v;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::LengthMismatch, "vectors of different dimension");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double semantic_similarity(std::string_view rationale,
                           const std::vector<std::string>& cm_spans,
                           const std::vector<std::string>& si_spans,
                           EmbeddingProvider& embedder) {
  std::vector<double> a, b;
  try {
    a = embedder.embed(join_spans(cm_spans, si_spans));
    b = embedder.embed(rationale);
  } catch (const Error& e) {
    if (e.code() == Errc::EmbedderFailure) {
      throw Error(Errc::EmbedderFailure,
                  std::string("semantic similarity: ") + e.what());
    }
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::EmbedderFailure, std::string("semantic similarity: ") + e.what());
  }
  return cosine(a, b);
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + " values");
  }
  const std::size_t n = a.size();
  if (n < 2) throw Error(Errc::EmptyInput, "paired t-test needs at least 2 pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  if (std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); })) {
    throw Error(Errc::ZeroVariance, "all paired differences are equal");
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / double(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / double(n - 1));
  TTestResult r;
  r.t = mean / (sd / std::sqrt(double(n)));
  r.df = n - 1;
  const double df = static_cast<double>(r.df);
  r.p_two_sided = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + r.t * r.t));
  return r;
}

MetricSummary summarize(std::vector<double> values) {
  MetricSummary s;
  s.per_sample = std::move(values);
  if (s.per_sample.empty()) return s;
  const double n = static_cast<double>(s.per_sample.size());
  s.mean = std::accumulate(s.per_sample.begin(), s.per_sample.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : s.per_sample) ss += (x - s.mean) * (x - s.mean);
  s.variance = ss / n;
  return s;
}

ojson to_json(const EvalReport& report) {
  ojson o;
  o["metrics"] = ojson::object();
  for (const auto& [name, m] : report.metrics) {
    o["metrics"][name] = {{"mean", m.mean},
                          {"variance", m.variance},
                          {"per_sample", m.per_sample}};
  }
  o["counters"] = ojson::object();
  for (const auto& [name, c] : report.counters) o["counters"][name] = c;
  o["meta"] = report.meta;
  return o;
}

EvalReport eval_report_from_json(const ojson& j) {
  EvalReport r;
  try {
    for (const auto& [name, m] : j.at("metrics").items()) {
      MetricSummary s;
      s.mean = m.at("mean").get<double>();
      s.variance = m.at("variance").get<double>();
      s.per_sample = m.at("per_sample").get<std::vector<double>>();
      r.metrics[name] = std::move(s);
    }
    if (j.contains("counters")) {
      for (const auto& [name, c] : j["counters"].items()) {
        r.counters[name] = c.get<std::size_t>();
      }
    }
    if (j.contains("meta")) r.meta = j["meta"];
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("evaluation report: ") + e.what());
  }
  return r;
}

}  // namespace emocue
