#include "emocue/prompts.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

#include "emocue/error.hpp"
#include "emocue/io.hpp"
#include "emocue/random.hpp"

namespace emocue {

using ojson = nlohmann::ordered_json;

const std::string_view kFineTuneInstruction =
    "Analyze the following social media post to determine if it is related to "
    "self-harm. Identify spans related to casual mention and serious intent "
    "regarding self-harm.";

const std::string_view kRationaleInstruction =
    "Using the provided classification and extracted spans, generate a "
    "rationale explaining why the post is classified as self-harm or "
    "non-self-harm. Consider the spans and the emoji meanings provided.";

const std::string_view kZeroShotInstruction =
    "You are tasked with evaluating social media posts to classify them as "
    "self-harm or non self-harm. Review the post below and provide your "
    "classification. Additionally, write a detailed rationale that explains "
    "your decision, taking into account the content and context of the post.";

const std::string_view kFewShotInstruction =
    "You are tasked with evaluating social media posts to classify them as "
    "self-harm or non self-harm. Review the following posts and "
    "classifications to understand the task. Then classify the new post and "
    "write a detailed rationale that explains your decision, taking into "
    "account the content and context of the post.";

const std::string_view kSyntheticSelfHarmInstruction =
    "Create a Reddit post where the author reflects on their experiences with "
    "self-harm. The post should express a real person's emotions and thoughts, "
    "incorporating past incidents, current struggles, or stories related to "
    "their journey. Encourage the author to discuss their feelings, the impact "
    "on their life, or how they’ve tried to cope with their condition. The "
    "language should be varied and natural, avoiding repetition.";

const std::string_view kSyntheticNonSelfHarmInstruction =
    "Create a Reddit post containing phrases which indicate self harm in a "
    "joking or casual way. Phrases will be containing the self-harm intentions "
    "in a sarcastic way where the author is not actually going to harm himself "
    "or herself. It can show the irritation, stress, anger or disgrace just to "
    "express the situation. The author should be in a light mood to express "
    "his/her thoughts.";

namespace {

constexpr std::string_view kOutputFormat =
    "Classification: [self-harm / non self-harm]\n"
    "Rationale: Describes the factors and considerations that guided the "
    "classification decision.";

struct SyntheticExample {
  const char* post;
  std::vector<const char*> spans;
  const char* rationale;
};

const std::vector<SyntheticExample>& synthetic_examples(Label label) {
  static const std::vector<SyntheticExample> sh = {
      {"I keep finding myself tracing the scars on my skin, a reminder of the "
       "war inside my head. The urge to self-harm is like a shadow that never "
       "leaves, lurking in the corners of my mind. It's a battle between wanting "
       "to feel something and wanting the pain to stop. Sometimes the blade "
       "feels like the only friend who understands. But deep down, I know it's "
       "not the answer. Trying to hold on to hope like a fragile thread in a "
       "storm. One day at a time, one breath at a time. We're warriors fighting "
       "invisible battles, and our scars tell stories of survival.",
       {"tracing the scars on my skin", "urge to self-harm",
        "the blade feels like the only friend"},
       "The reference of \"urge to self-harm\" and \"the blade feels like the "
       "only friend\" is unquestionably an indication of the author's genuine "
       "resolve to cause physical harm to themselves."},
      {"It’s been years since I last hurt myself, but yesterday, I had the "
       "strongest urge to do it again. I found an old blade in my drawer and "
       "just sat there holding it, trying to convince myself not to use it. I "
       "didn’t, but it was so hard.",
       {"since I last hurt myself", "strongest urge to do it again"},
       "The use of phrases like \"strongest urge to do it again\" by the user "
       "exhibit a definite intention of causing self-injury, combined with the "
       "context of the post."},
  };
  static const std::vector<SyntheticExample> nsh = {
      {"Great, my boss just gave me another pointless task. Guess I'll just "
       "bang my head against the wall.",
       {"bang my head against the wall"},
       "The mention of \"bang my head against the wall\" is a violent "
       "expression suggesting intention to hurt themselves, but,with the "
       "context of the situation, it is clearly just a metaphorical expression "
       "for frustration and does not show an actual desire for self harm."},
      {"Lost all my progress because of a glitch. Might as well just throw "
       "myself off a cliff.",
       {" throw myself off a cliff."},
       "The mention of \"throw myself off a cliff\" shows exasperation of author "
       "about loosing his work, but it is clear looking at the emojis that it "
       "is definitely not said in a serious intent of harming themselves."},
  };
  return label == Label::SelfHarm ? sh : nsh;
}

std::string_view synthetic_span_key(Label label) {
  return label == Label::SelfHarm ? "serious intent spans" : "Casual intent spans";
}

std::vector<std::string> span_texts(const std::vector<Span>& spans) {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (const Span& s : spans) out.push_back(s.text);
  return out;
}

ojson enrichment_json(const std::vector<EmojiEnrichment>& items) {
  ojson arr = ojson::array();
  for (const EmojiEnrichment& e : items) {
    ojson o;
    o["emoji"] = e.glyph;
    o["usual_meaning"] = e.usual_meaning;
    o["contextual_meaning"] = e.contextual_meaning;
    o["casual mention chance"] = e.cm_chance;
    o["serious intent chance"] = e.si_chance;
    arr.push_back(std::move(o));
  }
  return arr;
}

void require_body(const Post& post) {
  if (post.body.empty()) {
    throw Error(Errc::MissingBody, "post '" + post.id + "' has an empty body");
  }
}

std::string exemplar_rationale(const Post& post) {
  const auto quoted = [](const std::vector<Span>& spans) {
    std::string out;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (i > 0) out += ", ";
      out += "\"" + spans[i].text + "\"";
    }
    return out;
  };
  if (!post.si_spans.empty()) {
    return "Serious intent is expressed in " + quoted(post.si_spans) + ".";
  }
  if (!post.cm_spans.empty()) {
    return "Self-harm language appears only as casual mention in " +
           quoted(post.cm_spans) + ".";
  }
  return post.label == Label::SelfHarm ? "The post describes self-harm."
                                       : "The post contains no self-harm language.";
}

}  // namespace

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::FineTune: return "finetune";
    case PromptMode::Rationale: return "rationale";
    case PromptMode::ZeroShot: return "zeroshot";
    case PromptMode::FewShot: return "fewshot";
    case PromptMode::Synthetic: return "synthetic";
  }
  return "zeroshot";
}

std::optional<PromptMode> parse_prompt_mode(std::string_view text) {
  for (PromptMode m : {PromptMode::FineTune, PromptMode::Rationale,
                       PromptMode::ZeroShot, PromptMode::FewShot,
                       PromptMode::Synthetic}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::string_view prompt_label(Label label) {
  return label == Label::SelfHarm ? "self-harm" : "non self-harm";
}

std::vector<EmojiEnrichment> enrich(const Post& post, const Lexicon& lexicon,
                                    std::vector<std::string>* warnings) {
  std::vector<EmojiEnrichment> out;
  std::unordered_set<std::string> seen;
  const auto scan = [&](std::string_view text) {
    for (const Token& t : emoji_tokens(text)) {
      if (!seen.insert(lexicon_key(t.text)).second) continue;
      EmojiEnrichment item;
      if (const EmojiEntry* entry = lexicon.lookup(t.text)) {
        item.glyph = entry->glyph;
        item.known = true;
        item.usual_meaning = entry->usual_meaning;
        item.contextual_meaning = entry->contextual_meaning;
        item.cm_chance = to_string(entry->cm_chance);
        item.si_chance = to_string(entry->si_chance);
      } else {
        item.glyph = std::string(t.text);
        if (warnings != nullptr) {
          warnings->push_back("post '" + post.id + "': emoji " + item.glyph +
                              " is not in the lexicon");
        }
      }
      out.push_back(std::move(item));
    }
  };
  if (post.title) scan(*post.title);
  scan(post.body);
  return out;
}

PromptInstance build_finetune(const Post& post, const Lexicon& lexicon) {
  PromptInstance p;
  p.id = post.id;
  p.mode = PromptMode::FineTune;
  p.instruction = kFineTuneInstruction;
  p.input["post text"] = post_text(post);
  p.input["emojis"] = enrichment_json(enrich(post, lexicon, &p.warnings));
  ojson out;
  out["classification"] = to_string(post.label);
  out["casual_mention_spans"] = span_texts(post.cm_spans);
  out["serious_intent_spans"] = span_texts(post.si_spans);
  p.expected_output = std::move(out);
  return p;
}

PromptInstance build_rationale(const Post& post,
                               const std::optional<Prediction>& prediction,
                               const Lexicon& lexicon) {
  if (!prediction) {
    throw Error(Errc::MissingPrediction,
                "rationale prompt for '" + post.id + "' needs a prediction");
  }
  PromptInstance p;
  p.id = post.id;
  p.mode = PromptMode::Rationale;
  p.instruction = kRationaleInstruction;
  p.input["post text"] = post_text(post);
  p.input["classification"] = to_string(prediction->label);
  p.input["casual_mention_spans"] = prediction->cm_spans;
  p.input["serious_intent_spans"] = prediction->si_spans;
  p.input["emojis"] = enrichment_json(enrich(post, lexicon, &p.warnings));
  return p;
}

PromptInstance build_zeroshot(const Post& post) {
  require_body(post);
  PromptInstance p;
  p.id = post.id;
  p.mode = PromptMode::ZeroShot;
  p.instruction = kZeroShotInstruction;
  p.input["post text"] = post_text(post);
  return p;
}

PromptInstance build_fewshot(const Post& post, const std::vector<Post>& exemplars) {
  if (exemplars.empty()) {
    throw Error(Errc::EmptyExemplars, "few-shot prompt needs at least one exemplar");
  }
  require_body(post);
  PromptInstance p;
  p.id = post.id;
  p.mode = PromptMode::FewShot;
  p.instruction = kFewShotInstruction;
  ojson examples = ojson::array();
  for (const Post& e : exemplars) {
    ojson o;
    o["id"] = e.id;
    o["post"] = post_text(e);
    o["classification"] = prompt_label(e.label);
    o["rationale"] = exemplar_rationale(e);
    examples.push_back(std::move(o));
  }
  p.input["examples"] = std::move(examples);
  p.input["new post text"] = post_text(post);
  return p;
}

PromptInstance build_synthetic(Label label) {
  PromptInstance p;
  p.id = std::string("synthetic-") + std::string(to_string(label));
  p.mode = PromptMode::Synthetic;
  p.instruction = label == Label::SelfHarm ? kSyntheticSelfHarmInstruction
                                           : kSyntheticNonSelfHarmInstruction;
  ojson examples = ojson::array();
  for (const SyntheticExample& e : synthetic_examples(label)) {
    ojson o;
    o["post"] = e.post;
    std::vector<std::string> spans(e.spans.begin(), e.spans.end());
    o[std::string(synthetic_span_key(label))] = spans;
    o["rationale"] = e.rationale;
    examples.push_back(std::move(o));
  }
  p.input["label"] = to_string(label);
  p.input["examples"] = std::move(examples);
  return p;
}

std::string_view to_string(ExemplarKind kind) {
  switch (kind) {
    case ExemplarKind::CasualMention: return "casual_mention";
    case ExemplarKind::SeriousIntent: return "serious_intent";
    case ExemplarKind::Borderline: return "borderline";
  }
  return "borderline";
}

bool is_borderline(const Post& post) {
  return !post.cm_spans.empty() && !post.si_spans.empty();
}

std::vector<Post> select_exemplars(const Corpus& corpus, int k, std::uint64_t seed,
                                   const ExemplarOptions& options) {
  if (k != 2 && k != 5) {
    throw Error(Errc::InvalidArgument, "exemplar count must be 2 or 5");
  }
  Rng rng(seed);
  std::set<std::size_t> used;

  const auto pick = [&](std::size_t count,
                        const std::function<bool(const Post&)>& pred) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
      if (!used.count(i) && pred(corpus.posts[i])) pool.push_back(i);
    }
    if (pool.size() < count) return std::vector<std::size_t>{};
    rng.shuffle(std::span(pool));
    pool.resize(count);
    used.insert(pool.begin(), pool.end());
    return pool;
  };
  const auto need = [](ExemplarKind kind, std::size_t count,
                       std::vector<std::size_t> got) {
    if (got.size() < count) {
      throw Error(Errc::InsufficientExemplars,
                  "not enough " + std::string(to_string(kind)) + " exemplars");
    }
    return got;
  };

  std::vector<std::size_t> borderline;
  if (k == 5) {
    if (options.borderline) {
      borderline = pick(1, options.borderline);
    } else {
      borderline = pick(1, is_borderline);
      if (borderline.empty()) {
        borderline = pick(1, [](const Post& p) {
          return p.label == Label::SelfHarm && !p.cm_spans.empty() &&
                 p.si_spans.empty();
        });
      }
    }
    need(ExemplarKind::Borderline, 1, borderline);
  }
  const std::size_t per_kind = k == 5 ? 2 : 1;
  const auto si = need(ExemplarKind::SeriousIntent, per_kind,
                       pick(per_kind, [](const Post& p) {
                         return p.label == Label::SelfHarm && !p.si_spans.empty();
                       }));
  const auto cm = need(ExemplarKind::CasualMention, per_kind,
                       pick(per_kind, [](const Post& p) {
                         return p.label == Label::NonSelfHarm && !p.cm_spans.empty();
                       }));

  std::vector<Post> out;
  for (std::size_t i = 0; i < per_kind; ++i) {
    out.push_back(corpus.posts[si[i]]);
    out.push_back(corpus.posts[cm[i]]);
  }
  if (!borderline.empty()) out.push_back(corpus.posts[borderline.front()]);
  return out;
}

std::string prompt_post_text(const PromptInstance& prompt) {
  for (const char* key : {"post text", "new post text"}) {
    if (prompt.input.contains(key) && prompt.input[key].is_string()) {
      return prompt.input[key].get<std::string>();
    }
  }
  return {};
}

std::string render_prompt(const PromptInstance& prompt) {
  std::ostringstream out;
  switch (prompt.mode) {
    case PromptMode::FineTune:
    case PromptMode::Rationale: {
      ojson o;
      o["instruction"] = prompt.instruction;
      o["input"] = prompt.input;
      return o.dump(4);
    }
    case PromptMode::ZeroShot:
      out << "## Instruction\n\n" << prompt.instruction << "\n\n## Input\n\n"
          << prompt_post_text(prompt) << "\n\n## Output\n\n" << kOutputFormat
          << '\n';
      break;
    case PromptMode::FewShot: {
      out << "## Instruction\n\n" << prompt.instruction << "\n\n## Input\n\n";
      std::size_t i = 0;
      for (const auto& e : prompt.input["examples"]) {
        out << "Example " << ++i << ":\n"
            << "Post: \"" << e["post"].get<std::string>() << "\"\n"
            << "Classification: " << e["classification"].get<std::string>() << '\n'
            << "Rationale: " << e["rationale"].get<std::string>() << '\n';
      }
      out << "New Post:\n" << prompt_post_text(prompt) << "\n\n## Output\n\n"
          << kOutputFormat << '\n';
      break;
    }
    case PromptMode::Synthetic: {
      out << "## Instruction\n\n" << prompt.instruction << "\n\n## Input\n\n";
      std::size_t i = 0;
      for (const auto& e : prompt.input["examples"]) {
        if (i > 0) out << '\n';
        out << "Example " << ++i << ":\n"
            << "Post: \"" << e["post"].get<std::string>() << "\"\n";
        for (const auto& [key, value] : e.items()) {
          if (key == "post" || key == "rationale") continue;
          out << key << ": [";
          bool first = true;
          for (const auto& s : value) {
            if (!first) out << ",";
            first = false;
            out << '"' << s.get<std::string>() << '"';
          }
          out << "]\n";
        }
        out << "Rationale: " << e["rationale"].get<std::string>() << '\n';
      }
      out << "\n## Output\n";
      break;
    }
  }
  return out.str();
}

std::string serialize_prompt(const PromptInstance& prompt) {
  ojson o;
  o["id"] = prompt.id;
  o["mode"] = to_string(prompt.mode);
  o["instruction"] = prompt.instruction;
  o["input"] = prompt.input;
  o["output"] = prompt.expected_output ? *prompt.expected_output : ojson("");
  return o.dump();
}

PromptInstance parse_prompt(std::string_view json_line) {
  ojson o;
  try {
    o = ojson::parse(json_line);
  } catch (const ojson::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  const auto fail = [](const std::string& why) {
    return Error(Errc::ParseError, "prompt: " + why);
  };
  if (!o.is_object()) throw fail("not an object");
  PromptInstance p;
  if (!o.contains("mode") || !o["mode"].is_string()) throw fail("missing mode");
  const auto mode = parse_prompt_mode(o["mode"].get<std::string>());
  if (!mode) throw fail("unknown mode '" + o["mode"].get<std::string>() + "'");
  p.mode = *mode;
  if (o.contains("id") && o["id"].is_string()) p.id = o["id"].get<std::string>();
  if (!o.contains("instruction") || !o["instruction"].is_string()) {
    throw fail("missing instruction");
  }
  p.instruction = o["instruction"].get<std::string>();
  if (!o.contains("input") || !o["input"].is_object()) throw fail("missing input");
  p.input = o["input"];
  if (o.contains("output") && o["output"].is_object()) p.expected_output = o["output"];
  return p;
}

std::vector<PromptInstance> load_prompts(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  std::vector<PromptInstance> out;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_prompt(line));
    } catch (const Error& e) {
      throw Error(Errc::ParseError, e.what(), line_no);
    }
  }
  return out;
}

void save_prompts(const std::vector<PromptInstance>& prompts,
                  const std::filesystem::path& path) {
  std::string out;
  for (const PromptInstance& p : prompts) {
    out += serialize_prompt(p);
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace emocue
