#pragma once

// Scoring of prediction records and the end-to-end evaluation run.
//
// Prediction record (one JSONL line per sample):
//   {"id", "mode", "completion", "route": "strict" | ... | null,
//    "prediction": {"classification", "casual_mention_spans",
//                   "serious_intent_spans", "rationale"} | null,
//    "error": null | "<message>"}

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emocue/corpus.hpp"
#include "emocue/gateway.hpp"
#include "emocue/metrics.hpp"
#include "emocue/prompts.hpp"

namespace emocue {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct PredictionRecord {
  std::string id;
  std::string mode;
  std::string completion;
  std::optional<Prediction> prediction;
  /// Set when the completion failed or could not be parsed.
  std::string error;
};

std::string serialize_record(const PredictionRecord& record);
/// Throws ParseError(line).
std::vector<PredictionRecord> load_records(const std::filesystem::path& path);
void save_records(const std::vector<PredictionRecord>& records,
                  const std::filesystem::path& path);

/// Parses each outcome into a record (unparseable ones keep `error`).
std::vector<PredictionRecord> to_records(const std::vector<PromptInstance>& prompts,
                                         const std::vector<CompletionOutcome>& outcomes);

enum class RationaleSpans { Predicted, Gold };

struct ScoreOptions {
  bool classification = true;
  bool spans = true;
  bool rationale = true;
  bool macro = false;
  TokenizeOptions tokenize;
  RationaleSpans rationale_spans = RationaleSpans::Predicted;
};

/// Scores records against gold posts matched by id. A record without a
/// prediction counts as the wrong label and is left out of span and
/// rationale metrics ("unparseable" counter). Throws MisalignedIds when a
/// record id is not in `gold`, EmptyInput when there are no records.
///
/// Metrics: classification_f1 (one value), cm_span_f1, si_span_f1,
/// relevance, coherence, readability, readability_grade,
/// semantic_similarity (per sample).
EvalReport score_records(const std::vector<PredictionRecord>& records,
                         const Corpus& gold, const ScoreOptions& options,
                         EmbeddingProvider& embedder);

enum class PipelineMode { FineTune, ZeroShot, FewShot };
std::string_view to_string(PipelineMode mode);
std::optional<PipelineMode> parse_pipeline_mode(std::string_view text);

struct PipelineConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path lexicon_path;  // required for FineTune
  PipelineMode mode = PipelineMode::FineTune;
  BackendConfig backend;
  std::uint64_t seed = 0;
  int runs = 1;
  double test_fraction = 0.2;
  int k = 2;
  bool macro = false;
  bool remove_articles = false;
  std::size_t embedding_dimension = 256;
  LoadMode load_mode = LoadMode::Strict;
  /// Artifacts (per-run prompts, records, reports) go here when set.
  std::filesystem::path out_dir;
};

nlohmann::ordered_json to_json(const PipelineConfig& config);

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct RunManifest {
  nlohmann::ordered_json config;
  std::map<std::string, std::string> input_sha256;
  std::vector<std::uint64_t> seeds;
  std::string tool_version{kToolVersion};
  std::vector<StageTiming> timings;
};

nlohmann::ordered_json to_json(const RunManifest& manifest);

struct PipelineResult {
  /// With one run: per-sample values of that run. With n runs: per_sample
  /// holds the n run means and variance is their population variance.
  EvalReport report;
  std::vector<EvalReport> runs;
  RunManifest manifest;
};

/// Stage failures are rethrown with the same code and a "stage <name>:"
/// prefix.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Report JSON without the fields that legitimately differ between two
/// identical runs (timestamp, stage timings).
nlohmann::ordered_json comparable(const nlohmann::ordered_json& report);

}  // namespace emocue
