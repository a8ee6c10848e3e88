#pragma once

// Evaluation measures.
//
// Span tokens: lowercase, drop Unicode punctuation and ASCII symbols, split
// on whitespace; optional removal of "a", "an", "the".
//
// Coherence: two-document TF-IDF over {joined spans, rationale} with raw
// term counts, idf = ln(3 / (1 + df)) + 1 and L2-normalized vectors. Terms
// are span tokens.
//
// Readability: Flesch-Kincaid grade. Words are whitespace tokens holding a
// letter or digit. Syllables per word are vowel groups (a e i o u y) minus a
// trailing silent 'e', at least 1. A sentence ends at '.', '!' or '?'
// followed by whitespace or end of text; a trailing fragment with words
// counts as a sentence. normalized = clamp((18 - grade) / 18, 0, 1).

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emocue/label.hpp"

namespace emocue {

struct TokenizeOptions {
  bool remove_articles = false;
};

std::vector<std::string> span_tokens(std::string_view text,
                                     const TokenizeOptions& options = {});

struct TokenScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Both empty: all 1. One side empty: all 0.
TokenScore token_scores(std::string_view pred, std::string_view gold,
                        const TokenizeOptions& options = {});
double token_f1(std::string_view pred, std::string_view gold,
                const TokenizeOptions& options = {});

/// Mean over predicted spans of the best token F1 against any gold span.
/// Both lists empty: 1. Exactly one empty: 0.
double span_set_f1(const std::vector<std::string>& preds,
                   const std::vector<std::string>& golds,
                   const TokenizeOptions& options = {});

/// Positive-class F1, or the mean of both per-class F1 values with `macro`.
/// Throws LengthMismatch or EmptyInput.
double classification_f1(const std::vector<Label>& preds,
                         const std::vector<Label>& golds,
                         Label positive = Label::SelfHarm, bool macro = false);

/// Spans of both categories joined by single spaces.
std::string join_spans(const std::vector<std::string>& cm_spans,
                       const std::vector<std::string>& si_spans);

/// 1 when every span occurs in the rationale ignoring case, else 0.
int relevance(std::string_view rationale, const std::vector<std::string>& cm_spans,
              const std::vector<std::string>& si_spans);

double coherence(std::string_view rationale, const std::vector<std::string>& cm_spans,
                 const std::vector<std::string>& si_spans);

/// Cosine of the TF-IDF vectors of two documents tokenized with span_tokens.
double tfidf_cosine(std::string_view a, std::string_view b);

struct Readability {
  double grade = 0.0;
  double normalized = 0.0;
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
};

std::size_t count_syllables(std::string_view word);

/// Throws EmptyText when the text has no words.
Readability readability(std::string_view text);

/// Maps a text to a fixed-length vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Throws Error(EmbedderFailure) on failure.
  virtual std::vector<double> embed(std::string_view text) = 0;
  virtual std::size_t dimension() const = 0;
  /// Callers serialize embed() calls when this is false.
  virtual bool supports_concurrent_calls() const { return false; }
};

/// Bag of words hashed (FNV-1a) into `dimension` buckets, counts as values.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256);
  std::vector<double> embed(std::string_view text) override;
  std::size_t dimension() const override { return dimension_; }
  bool supports_concurrent_calls() const override { return true; }

 private:
  std::size_t dimension_;
};

/// 0 when either vector has zero norm. Throws LengthMismatch.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

double semantic_similarity(std::string_view rationale,
                           const std::vector<std::string>& cm_spans,
                           const std::vector<std::string>& si_spans,
                           EmbeddingProvider& embedder);

struct TTestResult {
  double t = 0.0;
  std::size_t df = 0;
  double p_two_sided = 1.0;
};

/// I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

/// Throws LengthMismatch, EmptyInput (n < 2) or ZeroVariance.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct MetricSummary {
  double mean = 0.0;
  /// Population variance of per_sample.
  double variance = 0.0;
  std::vector<double> per_sample;
};

MetricSummary summarize(std::vector<double> values);

struct EvalReport {
  std::map<std::string, MetricSummary> metrics;
  std::map<std::string, std::size_t> counters;
  /// Run metadata (seed, model id, timestamp, manifest, ...).
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

nlohmann::ordered_json to_json(const EvalReport& report);
/// Throws ParseError.
EvalReport eval_report_from_json(const nlohmann::ordered_json& j);

}  // namespace emocue
