#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "emocue/agreement.hpp"
#include "emocue/corpus.hpp"
#include "emocue/error.hpp"
#include "emocue/gateway.hpp"
#include "emocue/io.hpp"
#include "emocue/lexicon.hpp"
#include "emocue/metrics.hpp"
#include "emocue/pipeline.hpp"
#include "emocue/prompts.hpp"
#include "emocue/unicode.hpp"

namespace emocue::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string format = "json";
  bool strict = false;
  ojson config = ojson::object();
};

void flatten(const ojson& value, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& rows) {
  if (value.is_object()) {
    for (const auto& [k, v] : value.items()) {
      flatten(v, prefix.empty() ? k : prefix + "." + k, rows);
    }
  } else if (value.is_array()) {
    std::string joined;
    bool scalars = true;
    for (const auto& v : value) scalars = scalars && !v.is_structured();
    if (!scalars) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        flatten(value[i], prefix + "." + std::to_string(i), rows);
      }
      return;
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i > 0) joined += ';';
      joined += value[i].is_string() ? value[i].get<std::string>() : value[i].dump();
    }
    rows.emplace_back(prefix, joined);
  } else {
    rows.emplace_back(prefix, value.is_string() ? value.get<std::string>() : value.dump());
  }
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void emit(const Globals& g, const ojson& value) {
  if (g.format == "csv") {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(value, "", rows);
    std::cout << "key,value\n";
    for (const auto& [k, v] : rows) std::cout << csv_cell(k) << ',' << csv_cell(v) << '\n';
  } else {
    std::cout << value.dump(2) << '\n';
  }
}

LoadMode load_mode(const Globals& g) { return g.strict ? LoadMode::Strict : LoadMode::Lenient; }

ojson issues_json(const std::vector<Issue>& issues) {
  ojson arr = ojson::array();
  for (const Issue& i : issues) {
    arr.push_back({{"line", i.line},
                   {"field", i.field},
                   {"reason", i.reason},
                   {"severity", i.severity == Severity::Error ? "error" : "warning"}});
  }
  return arr;
}

Corpus read_corpus(const Globals& g, const fs::path& path) {
  CorpusLoad load = load_corpus(path, load_mode(g));
  for (const Issue& i : load.issues) {
    std::cerr << path.string() << ":" << i.line << ": "
              << (i.severity == Severity::Error ? "dropped: " : "warning: ") << i.field
              << ": " << i.reason << '\n';
  }
  return std::move(load.corpus);
}

Lexicon read_lexicon(const fs::path& path) {
  LexiconLoad load = load_lexicon(path);
  for (const auto& w : load.warnings) std::cerr << path.string() << ": warning: " << w << '\n';
  return std::move(load.lexicon);
}

ojson report_json(const ValidationReport& r) {
  ojson o;
  o["entry_count"] = r.entry_count;
  o["ok"] = r.ok();
  o["violations"] = ojson::array();
  for (const auto& v : r.violations) {
    o["violations"].push_back({{"line", v.line}, {"kind", v.kind}, {"message", v.message}});
  }
  o["warnings"] = r.warnings;
  for (const auto& [name, d] : {std::pair{"cm_chance", r.cm}, std::pair{"si_chance", r.si}}) {
    o[name] = {{"Low", d.low}, {"Medium", d.medium}, {"High", d.high}};
  }
  o["unicode_version"] = unicode::kUnicodeVersion;
  return o;
}

ojson stats_json(const StatsReport& s) {
  ojson o;
  o["total"] = s.total;
  o["self_harm"] = s.self_harm;
  o["non_self_harm"] = s.non_self_harm;
  o["with_emoji"] = s.with_emoji;
  o["without_emoji"] = s.without_emoji;
  o["original"] = s.original;
  o["synthetic"] = s.synthetic;
  o["average_words"] = s.average_words;
  o["average_defined"] = s.average_defined;
  o["sh_with_cm"] = s.sh_with_cm;
  o["sh_with_si"] = s.sh_with_si;
  o["nsh_with_cm"] = s.nsh_with_cm;
  o["nsh_with_si"] = s.nsh_with_si;
  return o;
}

ojson emoji_report_json(const EmojiContextReport& r) {
  ojson o;
  o["compositions"] = ojson::object();
  for (std::size_t b = 0; b < kCompositionBuckets.size(); ++b) {
    o["compositions"][std::string(kCompositionBuckets[b])] = {
        {"self-harm", r.compositions.at(b, Label::SelfHarm)},
        {"non-self-harm", r.compositions.at(b, Label::NonSelfHarm)}};
  }
  o["strategy"] = ojson::object();
  for (Strategy s : {Strategy::Direct, Strategy::Metaphorical, Strategy::SemanticList}) {
    const auto& row = r.strategy.counts[static_cast<std::size_t>(s)];
    o["strategy"][std::string(to_string(s))] = {{"serious_intent", row[0]},
                                                {"casual_mention", row[1]}};
  }
  o["emoji"] = ojson::object();
  for (const auto& [glyph, c] : r.per_emoji) {
    o["emoji"][glyph] = {{"cm_spans", c.in_cm_spans},
                         {"si_spans", c.in_si_spans},
                         {"sh_posts", c.in_sh_posts},
                         {"nsh_posts", c.in_nsh_posts},
                         {"in_lexicon", c.in_lexicon}};
  }
  return o;
}

// CLI value > config file value > built-in default.
template <typename T>
void from_config(const ojson& section, const char* key, const CLI::App& app,
                 const char* flag, T& target) {
  if (app.count(flag) > 0) return;
  if (section.is_object() && section.contains(key) && !section[key].is_null()) {
    target = section[key].get<T>();
  }
}

BackendConfig backend_from(const Globals& g, const std::string& backend_flag,
                           const std::string& fixture) {
  BackendConfig c;
  if (g.config.contains("backend")) {
    c = backend_config_from_json(nlohmann::json::parse(g.config["backend"].dump()));
  } else if (!g.config_path.empty() && g.config.contains("endpoint_url")) {
    c = backend_config_from_json(nlohmann::json::parse(g.config.dump()));
  }
  if (backend_flag == "mock") c.backend = BackendKind::Mock;
  if (backend_flag == "http") c.backend = BackendKind::Http;
  if (!fixture.empty()) c.mock_fixture = fixture;
  c.validate();
  return c;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Emoji-aware self-harm text analysis and evaluation toolkit", "emocue"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_flag("--strict", g.strict, "Abort on the first invalid corpus row");

  int exit_code = 0;
  std::function<void()> action;

  // lexicon
  auto* lexicon_cmd = app.add_subcommand("lexicon", "Emoji lexicon tools");
  lexicon_cmd->require_subcommand(1);
  std::string lex_path, lex_format;
  auto* lex_validate = lexicon_cmd->add_subcommand("validate", "Check a lexicon file");
  lex_validate->add_option("path", lex_path)->required();
  lex_validate->add_option("--input-format", lex_format, "json or tsv (default: by extension)")
      ->check(CLI::IsMember({"json", "tsv"}));
  lex_validate->callback([&] {
    action = [&] {
      const LexiconFormat f = lex_format.empty() ? format_for_path(lex_path)
                              : lex_format == "tsv" ? LexiconFormat::Tsv
                                                    : LexiconFormat::Json;
      const ValidationReport r = validate_lexicon_file(lex_path, f);
      emit(g, report_json(r));
      if (!r.ok()) exit_code = 1;
    };
  });

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "Annotated corpus tools");
  corpus_cmd->require_subcommand(1);
  std::string corpus_path, corpus_lexicon, out_path, train_out, test_out, perturb_mode = "shuffle";
  double fraction = 0.2;
  bool strict_adjacency = false;

  auto* c_validate = corpus_cmd->add_subcommand("validate", "Check every post");
  c_validate->add_option("path", corpus_path)->required();
  c_validate->callback([&] {
    action = [&] {
      const CorpusLoad load = parse_corpus(io::read_file(corpus_path), LoadMode::Lenient);
      std::size_t errors = 0, warnings = 0;
      for (const Issue& i : load.issues) ++(i.severity == Severity::Error ? errors : warnings);
      ojson o;
      o["valid_posts"] = load.corpus.posts.size();
      o["invalid_posts"] = load.dropped;
      o["errors"] = errors;
      o["warnings"] = warnings;
      o["issues"] = issues_json(load.issues);
      emit(g, o);
      if (errors > 0) exit_code = 1;
    };
  });

  auto* c_stats = corpus_cmd->add_subcommand("stats", "Dataset statistics");
  c_stats->add_option("path", corpus_path)->required();
  c_stats->callback([&] {
    action = [&] { emit(g, stats_json(corpus_stats(read_corpus(g, corpus_path)))); };
  });

  auto* c_report = corpus_cmd->add_subcommand("emoji-report", "Emoji context counts");
  c_report->add_option("path", corpus_path)->required();
  c_report->add_option("--lexicon", corpus_lexicon, "Lexicon used to flag known emoji");
  c_report->add_flag("--strict-adjacency", strict_adjacency,
                     "Only directly adjacent emoji form a composition");
  c_report->callback([&] {
    action = [&] {
      const Corpus corpus = read_corpus(g, corpus_path);
      std::optional<Lexicon> lexicon;
      if (!corpus_lexicon.empty()) lexicon = read_lexicon(corpus_lexicon);
      emit(g, emoji_report_json(emoji_context_report(
                  corpus, lexicon ? &*lexicon : nullptr,
                  strict_adjacency ? Adjacency::Strict : Adjacency::WhitespaceTolerant)));
    };
  });

  auto* c_split = corpus_cmd->add_subcommand("split", "Stratified train/test split");
  c_split->add_option("path", corpus_path)->required();
  c_split->add_option("--fraction", fraction, "Test fraction of original posts")
      ->capture_default_str();
  c_split->add_option("--train-out", train_out)->required();
  c_split->add_option("--test-out", test_out)->required();
  c_split->callback([&] {
    action = [&] {
      const SplitResult s = split_corpus(read_corpus(g, corpus_path), fraction, g.seed);
      save_corpus(s.train, train_out);
      save_corpus(s.test, test_out);
      emit(g, ojson{{"train", s.train.posts.size()}, {"test", s.test.posts.size()},
                    {"seed", g.seed}});
    };
  });

  auto* c_perturb = corpus_cmd->add_subcommand("perturb", "Emoji ablation noise");
  c_perturb->add_option("path", corpus_path)->required();
  c_perturb->add_option("--mode", perturb_mode)
      ->check(CLI::IsMember({"shuffle", "replace"}))
      ->capture_default_str();
  c_perturb->add_option("--fraction", fraction)->capture_default_str();
  c_perturb->add_option("--lexicon", corpus_lexicon, "Required for --mode replace");
  c_perturb->add_option("--out", out_path)->required();
  c_perturb->callback([&] {
    action = [&] {
      const Corpus corpus = read_corpus(g, corpus_path);
      std::optional<Lexicon> lexicon;
      if (!corpus_lexicon.empty()) lexicon = read_lexicon(corpus_lexicon);
      const PerturbResult r = perturb(corpus, *parse_perturb_mode(perturb_mode), fraction,
                                      g.seed, lexicon ? &*lexicon : nullptr);
      save_corpus(r.corpus, out_path);
      emit(g, ojson{{"modified", r.modified_ids.size()}, {"modified_ids", r.modified_ids}});
    };
  });

  // prompt
  auto* prompt_cmd = app.add_subcommand("prompt", "Prompt construction");
  prompt_cmd->require_subcommand(1);
  std::string prompt_mode, prompt_corpus, prompt_lexicon, prompt_preds, synthetic_label;
  int k = 2;
  auto* p_build = prompt_cmd->add_subcommand("build", "Render prompts to JSONL");
  p_build->add_option("--mode", prompt_mode)
      ->required()
      ->check(CLI::IsMember({"finetune", "rationale", "zeroshot", "fewshot", "synthetic"}));
  p_build->add_option("--corpus", prompt_corpus, "Posts to render");
  p_build->add_option("--lexicon", prompt_lexicon, "Needed by finetune and rationale");
  p_build->add_option("--predictions", prompt_preds, "Prediction records (rationale mode)");
  p_build->add_option("--k", k, "Few-shot exemplar count")
      ->check(CLI::IsMember({2, 5}))
      ->capture_default_str();
  p_build->add_option("--label", synthetic_label, "self-harm or non-self-harm (synthetic)");
  p_build->add_option("--out", out_path)->required();
  p_build->callback([&] {
    action = [&] {
      const PromptMode mode = *parse_prompt_mode(prompt_mode);
      std::vector<PromptInstance> prompts;
      std::vector<std::string> warnings;
      if (mode == PromptMode::Synthetic) {
        std::vector<Label> labels = {Label::SelfHarm, Label::NonSelfHarm};
        if (!synthetic_label.empty()) {
          const auto l = parse_label(synthetic_label);
          if (!l) throw Error(Errc::InvalidArgument, "unknown label '" + synthetic_label + "'");
          labels = {*l};
        }
        for (Label l : labels) prompts.push_back(build_synthetic(l));
      } else {
        if (prompt_corpus.empty()) throw Error(Errc::InvalidArgument, "--corpus is required");
        const Corpus corpus = read_corpus(g, prompt_corpus);
        std::optional<Lexicon> lexicon;
        if (!prompt_lexicon.empty()) lexicon = read_lexicon(prompt_lexicon);
        if ((mode == PromptMode::FineTune || mode == PromptMode::Rationale) && !lexicon) {
          throw Error(Errc::InvalidArgument, "--lexicon is required for " + prompt_mode);
        }
        std::map<std::string, Prediction> preds;
        if (mode == PromptMode::Rationale) {
          if (prompt_preds.empty()) {
            throw Error(Errc::MissingPrediction, "--predictions is required for rationale");
          }
          for (auto& r : load_records(prompt_preds)) {
            if (r.prediction) preds.emplace(r.id, std::move(*r.prediction));
          }
        }
        std::vector<Post> exemplars;
        std::set<std::string> exemplar_ids;
        if (mode == PromptMode::FewShot) {
          exemplars = select_exemplars(corpus, k, g.seed);
          for (const Post& e : exemplars) exemplar_ids.insert(e.id);
        }
        for (const Post& post : corpus.posts) {
          switch (mode) {
            case PromptMode::FineTune: prompts.push_back(build_finetune(post, *lexicon)); break;
            case PromptMode::Rationale: {
              auto it = preds.find(post.id);
              prompts.push_back(build_rationale(
                  post, it == preds.end() ? std::nullopt : std::optional(it->second),
                  *lexicon));
              break;
            }
            case PromptMode::ZeroShot: prompts.push_back(build_zeroshot(post)); break;
            case PromptMode::FewShot:
              if (!exemplar_ids.count(post.id)) prompts.push_back(build_fewshot(post, exemplars));
              break;
            case PromptMode::Synthetic: break;
          }
          warnings.insert(warnings.end(), prompts.back().warnings.begin(),
                          prompts.back().warnings.end());
        }
      }
      save_prompts(prompts, out_path);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      emit(g, ojson{{"prompts", prompts.size()}, {"warnings", warnings.size()},
                    {"out", out_path}});
    };
  });

  // run
  std::string backend_flag, prompts_path, fixture_path;
  auto* run_cmd = app.add_subcommand("run", "Send prompts to a backend and parse replies");
  run_cmd->add_option("--backend", backend_flag)->check(CLI::IsMember({"mock", "http"}));
  run_cmd->add_option("--prompts", prompts_path)->required();
  run_cmd->add_option("--out", out_path)->required();
  run_cmd->add_option("--fixture", fixture_path, "Mock completions keyed by prompt id");
  run_cmd->callback([&] {
    action = [&] {
      Gateway gateway(backend_from(g, backend_flag, fixture_path));
      const auto prompts = load_prompts(prompts_path);
      const auto records = to_records(prompts, complete_all(gateway, prompts));
      save_records(records, out_path);
      std::size_t failed = 0;
      for (const auto& r : records) failed += !r.prediction;
      emit(g, ojson{{"records", records.size()}, {"unparsed", failed}, {"out", out_path}});
    };
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions");
  eval_cmd->require_subcommand(1);
  std::string pred_path, gold_path, report_path, a_path, b_path, metric_name,
      rationale_spans = "predicted";
  bool macro = false, remove_articles = false;
  const auto add_eval = [&](const char* name, const char* help, ScoreOptions base) {
    auto* sub = eval_cmd->add_subcommand(name, help);
    sub->add_option("--pred", pred_path, "Prediction records (JSONL)")->required();
    sub->add_option("--gold", gold_path, "Gold corpus (JSONL)")->required();
    sub->add_option("--report", report_path, "Write the report here as well");
    sub->add_flag("--macro", macro, "Macro F1 over both classes");
    sub->add_flag("--remove-articles", remove_articles, "Drop a/an/the from span tokens");
    sub->add_option("--rationale-spans", rationale_spans)
        ->check(CLI::IsMember({"predicted", "gold"}))
        ->capture_default_str();
    sub->callback([&, base] {
      action = [&, base] {
        ScoreOptions options = base;
        options.macro = macro;
        options.tokenize.remove_articles = remove_articles;
        options.rationale_spans =
            rationale_spans == "gold" ? RationaleSpans::Gold : RationaleSpans::Predicted;
        HashingEmbedder embedder;
        EvalReport report =
            score_records(load_records(pred_path), read_corpus(g, gold_path), options, embedder);
        report.meta["pred_sha256"] = io::sha256_hex(io::read_file(pred_path));
        report.meta["gold_sha256"] = io::sha256_hex(io::read_file(gold_path));
        report.meta["tool_version"] = kToolVersion;
        const ojson j = to_json(report);
        if (!report_path.empty()) io::write_file(report_path, j.dump(2) + "\n");
        emit(g, j);
      };
    });
  };
  add_eval("classification", "Classification F1",
           ScoreOptions{true, false, false, false, {}, RationaleSpans::Predicted});
  add_eval("spans", "Span overlap F1",
           ScoreOptions{false, true, false, false, {}, RationaleSpans::Predicted});
  add_eval("rationale", "Rationale quality metrics",
           ScoreOptions{false, false, true, false, {}, RationaleSpans::Predicted});

  auto* e_sig = eval_cmd->add_subcommand("significance", "Paired t-test between two reports");
  e_sig->add_option("--a", a_path)->required();
  e_sig->add_option("--b", b_path)->required();
  e_sig->add_option("--metric", metric_name, "Metric to compare (default: all shared)");
  e_sig->callback([&] {
    action = [&] {
      const EvalReport a = eval_report_from_json(ojson::parse(io::read_file(a_path)));
      const EvalReport b = eval_report_from_json(ojson::parse(io::read_file(b_path)));
      ojson out = ojson::object();
      for (const auto& [name, ma] : a.metrics) {
        if (!metric_name.empty() && name != metric_name) continue;
        auto it = b.metrics.find(name);
        if (it == b.metrics.end()) continue;
        try {
          const TTestResult t = paired_t_test(ma.per_sample, it->second.per_sample);
          out[name] = {{"t", t.t}, {"df", t.df}, {"p_two_sided", t.p_two_sided}};
        } catch (const Error& e) {
          out[name] = {{"error", std::string(to_string(e.code()))}, {"message", e.detail()}};
          if (!metric_name.empty()) throw;
        }
      }
      if (!metric_name.empty() && out.empty()) {
        throw Error(Errc::InvalidArgument, "metric '" + metric_name + "' not in both reports");
      }
      emit(g, out);
    };
  });

  // agreement
  auto* agree_cmd = app.add_subcommand("agreement", "Inter-annotator agreement");
  agree_cmd->require_subcommand(1);
  std::string ratings_path, annotations_dir, category = "cm";
  auto* a_kappa = agree_cmd->add_subcommand("kappa", "Fleiss' kappa from an items x categories CSV");
  a_kappa->add_option("--ratings", ratings_path)->required()->check(CLI::ExistingFile);
  a_kappa->callback([&] {
    action = [&] {
      const RatingMatrix m = parse_rating_csv(io::read_file(ratings_path));
      emit(g, ojson{{"kappa", fleiss_kappa(m)}, {"items", m.counts.size()},
                    {"categories", m.categories}});
    };
  });
  auto* a_spans = agree_cmd->add_subcommand("spans", "Pairwise span F1 between annotators");
  a_spans->add_option("--annotations", annotations_dir, "Directory of per-annotator corpora")
      ->required()
      ->check(CLI::ExistingDirectory);
  a_spans->add_option("--category", category)->check(CLI::IsMember({"cm", "si"}))
      ->capture_default_str();
  a_spans->callback([&] {
    action = [&] {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(annotations_dir)) {
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      std::vector<AnnotatorSpans> annotators;
      for (const auto& f : files) {
        AnnotatorSpans spans;
        for (const Post& p : read_corpus(g, f).posts) {
          auto& list = spans[p.id];
          for (const Span& s : category == "cm" ? p.cm_spans : p.si_spans) list.push_back(s.text);
        }
        annotators.push_back(std::move(spans));
      }
      std::vector<std::string> names;
      for (const auto& f : files) names.push_back(f.filename().string());
      emit(g, ojson{{"category", category},
                    {"f1", span_agreement_f1(annotators)},
                    {"annotators", names}});
    };
  });

  // pipeline
  PipelineConfig pc;
  std::string pc_corpus, pc_lexicon, pc_mode = "finetune", pc_out;
  auto* pipe_cmd = app.add_subcommand("pipeline", "split, prompt, complete, parse and score");
  pipe_cmd->add_option("--corpus", pc_corpus);
  pipe_cmd->add_option("--lexicon", pc_lexicon);
  pipe_cmd->add_option("--mode", pc_mode)
      ->check(CLI::IsMember({"finetune", "zeroshot", "fewshot"}))
      ->capture_default_str();
  pipe_cmd->add_option("--backend", backend_flag)->check(CLI::IsMember({"mock", "http"}));
  pipe_cmd->add_option("--fixture", fixture_path, "Mock completions keyed by prompt id");
  pipe_cmd->add_option("--runs", pc.runs)->check(CLI::PositiveNumber)->capture_default_str();
  pipe_cmd->add_option("--fraction", pc.test_fraction, "Test fraction")->capture_default_str();
  pipe_cmd->add_option("--k", pc.k)->check(CLI::IsMember({2, 5}))->capture_default_str();
  pipe_cmd->add_flag("--macro", pc.macro);
  pipe_cmd->add_flag("--remove-articles", pc.remove_articles);
  pipe_cmd->add_option("--out-dir", pc_out, "Artifacts and report.json go here");
  pipe_cmd->callback([&] {
    action = [&] {
      const ojson section = g.config.value("pipeline", ojson::object());
      from_config(section, "corpus", *pipe_cmd, "--corpus", pc_corpus);
      from_config(section, "lexicon", *pipe_cmd, "--lexicon", pc_lexicon);
      from_config(section, "mode", *pipe_cmd, "--mode", pc_mode);
      from_config(section, "runs", *pipe_cmd, "--runs", pc.runs);
      from_config(section, "test_fraction", *pipe_cmd, "--fraction", pc.test_fraction);
      from_config(section, "k", *pipe_cmd, "--k", pc.k);
      from_config(section, "out_dir", *pipe_cmd, "--out-dir", pc_out);
      if (pc_corpus.empty()) throw Error(Errc::InvalidArgument, "--corpus is required");
      const auto mode = parse_pipeline_mode(pc_mode);
      if (!mode) throw Error(Errc::InvalidArgument, "unknown mode '" + pc_mode + "'");
      pc.corpus_path = pc_corpus;
      pc.lexicon_path = pc_lexicon;
      pc.mode = *mode;
      pc.out_dir = pc_out;
      pc.seed = g.seed;
      pc.load_mode = load_mode(g);
      pc.backend = backend_from(g, backend_flag, fixture_path);
      const PipelineResult r = run_pipeline(pc);
      emit(g, to_json(r.report));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!g.config_path.empty()) {
      g.config = ojson::parse(io::read_file(g.config_path));
      from_config(g.config, "seed", app, "--seed", g.seed);
      from_config(g.config, "format", app, "--format", g.format);
      from_config(g.config, "strict", app, "--strict", g.strict);
    }
    if (action) action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}

}  // namespace emocue::cli
