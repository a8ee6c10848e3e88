#pragma once

// Prompt construction for the five prompt families.
//
// Serialized form (one instance per JSONL line):
//   {"id": ..., "mode": "finetune" | "rationale" | "zeroshot" | "fewshot" |
//    "synthetic", "instruction": ..., "input": {...}, "output": {...} | ""}

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emocue/corpus.hpp"
#include "emocue/lexicon.hpp"
#include "emocue/prediction.hpp"

namespace emocue {

enum class PromptMode { FineTune, Rationale, ZeroShot, FewShot, Synthetic };

std::string_view to_string(PromptMode mode);
std::optional<PromptMode> parse_prompt_mode(std::string_view text);

struct PromptInstance {
  std::string id;
  PromptMode mode = PromptMode::ZeroShot;
  std::string instruction;
  nlohmann::ordered_json input = nlohmann::ordered_json::object();
  std::optional<nlohmann::ordered_json> expected_output;
  /// Not serialized.
  std::vector<std::string> warnings;
};

extern const std::string_view kFineTuneInstruction;
extern const std::string_view kRationaleInstruction;
extern const std::string_view kZeroShotInstruction;
extern const std::string_view kFewShotInstruction;
extern const std::string_view kSyntheticSelfHarmInstruction;
extern const std::string_view kSyntheticNonSelfHarmInstruction;

/// Label spelling used by the text (zero/few-shot) output format.
std::string_view prompt_label(Label label);

struct EmojiEnrichment {
  std::string glyph;
  bool known = false;
  std::string usual_meaning;
  std::string contextual_meaning;
  std::string cm_chance;
  std::string si_chance;
};

/// One item per distinct emoji (by lexicon key) in title and body, in order
/// of first occurrence. Emoji missing from the lexicon are kept with empty
/// fields and reported in `warnings`.
std::vector<EmojiEnrichment> enrich(const Post& post, const Lexicon& lexicon,
                                    std::vector<std::string>* warnings = nullptr);

PromptInstance build_finetune(const Post& post, const Lexicon& lexicon);

/// Throws MissingPrediction when `prediction` is empty.
PromptInstance build_rationale(const Post& post,
                               const std::optional<Prediction>& prediction,
                               const Lexicon& lexicon);

/// Throws MissingBody.
PromptInstance build_zeroshot(const Post& post);

/// Throws EmptyExemplars or MissingBody.
PromptInstance build_fewshot(const Post& post, const std::vector<Post>& exemplars);

PromptInstance build_synthetic(Label label);

enum class ExemplarKind { CasualMention, SeriousIntent, Borderline };
std::string_view to_string(ExemplarKind kind);

/// Default borderline predicate: both span categories present.
bool is_borderline(const Post& post);

struct ExemplarOptions {
  /// Overrides the default borderline rule when set; the fallback (self-harm
  /// post with casual mention spans only) is used only with the default.
  std::function<bool(const Post&)> borderline;
};

/// k = 2: [serious intent, casual mention]. k = 5: [serious intent, casual
/// mention, serious intent, casual mention, borderline]. Casual mention
/// exemplars are non-self-harm posts with casual mention spans; serious intent
/// exemplars are self-harm posts with serious intent spans. No post is used
/// twice. Throws InvalidArgument (k) or InsufficientExemplars(kind).
std::vector<Post> select_exemplars(const Corpus& corpus, int k, std::uint64_t seed,
                                   const ExemplarOptions& options = {});

/// Text actually sent to a model: the instance JSON without its output for
/// the fine-tuning families, the markdown layout for the others.
std::string render_prompt(const PromptInstance& prompt);

std::string serialize_prompt(const PromptInstance& prompt);
/// Throws ParseError.
PromptInstance parse_prompt(std::string_view json_line);

/// Reads a JSONL file of prompts; throws FileNotFound or ParseError(line).
std::vector<PromptInstance> load_prompts(const std::filesystem::path& path);
void save_prompts(const std::vector<PromptInstance>& prompts,
                  const std::filesystem::path& path);

/// The post text carried by a prompt ("post text" or "new post text").
std::string prompt_post_text(const PromptInstance& prompt);

}  // namespace emocue
