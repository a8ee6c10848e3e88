#include "emocue/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "emocue/error.hpp"
#include "emocue/io.hpp"
#include "emocue/lexicon.hpp"

namespace emocue {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string serialize_record(const PredictionRecord& r) {
  ojson o;
  o["id"] = r.id;
  o["mode"] = r.mode;
  o["completion"] = r.completion;
  if (r.prediction) {
    o["route"] = to_string(r.prediction->route);
    o["prediction"] = ojson::parse(serialize_prediction(*r.prediction));
    o["prediction"]["rationale"] = r.prediction->rationale;
  } else {
    o["route"] = nullptr;
    o["prediction"] = nullptr;
  }
  o["error"] = r.error.empty() ? ojson(nullptr) : ojson(r.error);
  return o.dump();
}

std::vector<PredictionRecord> load_records(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  std::vector<PredictionRecord> out;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json o = json::parse(line);
      PredictionRecord r;
      r.id = o.at("id").is_string() ? o["id"].get<std::string>()
                                    : std::to_string(o["id"].get<long long>());
      r.mode = o.value("mode", "");
      r.completion = o.value("completion", "");
      if (o.contains("error") && o["error"].is_string()) r.error = o["error"].get<std::string>();
      if (o.contains("prediction") && o["prediction"].is_object()) {
        Prediction p = parse_prediction(o["prediction"].dump());
        if (o.contains("route") && o["route"].is_string()) {
          const std::string route = o["route"].get<std::string>();
          p.route = route == "recovered"  ? ParseRoute::Recovered
                    : route == "fallback" ? ParseRoute::Fallback
                                          : ParseRoute::Strict;
        }
        r.prediction = std::move(p);
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, e.what(), line_no);
    } catch (const Error& e) {
      throw Error(Errc::ParseError, e.detail(), line_no);
    }
  }
  return out;
}

void save_records(const std::vector<PredictionRecord>& records,
                  const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  io::write_file(path, out);
}

std::vector<PredictionRecord> to_records(const std::vector<PromptInstance>& prompts,
                                         const std::vector<CompletionOutcome>& outcomes) {
  std::vector<PredictionRecord> out;
  out.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    PredictionRecord r;
    r.id = prompts[i].id;
    r.mode = to_string(prompts[i].mode);
    const CompletionOutcome& o = outcomes.at(i);
    if (!o.completion) {
      r.error = o.error_message;
    } else {
      r.completion = o.completion->text;
      try {
        r.prediction = parse_prediction(*o.completion);
      } catch (const Error& e) {
        r.error = e.what();
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

EvalReport score_records(const std::vector<PredictionRecord>& records,
                         const Corpus& gold, const ScoreOptions& options,
                         EmbeddingProvider& embedder) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no prediction records");
  std::unordered_map<std::string, const Post*> by_id;
  for (const Post& p : gold.posts) by_id.emplace(p.id, &p);

  const auto texts = [](const std::vector<Span>& spans) {
    std::vector<std::string> out;
    for (const Span& s : spans) out.push_back(s.text);
    return out;
  };

  EvalReport report;
  auto& counters = report.counters;
  for (const char* name : {"samples", "unparseable", "route_strict", "route_recovered",
                           "route_fallback"}) {
    counters[name] = 0;
  }
  std::vector<Label> preds, golds;
  std::vector<double> cm, si, rel, coh, read, grade, sem;

  for (const PredictionRecord& r : records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      throw Error(Errc::MisalignedIds, "prediction id '" + r.id + "' has no gold post");
    }
    const Post& g = *it->second;
    ++counters["samples"];
    golds.push_back(g.label);
    if (!r.prediction) {
      ++counters["unparseable"];
      preds.push_back(flipped(g.label));
      continue;
    }
    const Prediction& p = *r.prediction;
    ++counters[std::string("route_") + std::string(to_string(p.route))];
    preds.push_back(p.label);

    const auto gold_cm = texts(g.cm_spans);
    const auto gold_si = texts(g.si_spans);
    if (options.spans) {
      if (p.cm_spans.empty() && gold_cm.empty()) ++counters["vacuous_cm"];
      if (p.si_spans.empty() && gold_si.empty()) ++counters["vacuous_si"];
      cm.push_back(span_set_f1(p.cm_spans, gold_cm, options.tokenize));
      si.push_back(span_set_f1(p.si_spans, gold_si, options.tokenize));
    }
    if (options.rationale) {
      const bool predicted = options.rationale_spans == RationaleSpans::Predicted;
      const auto& use_cm = predicted ? p.cm_spans : gold_cm;
      const auto& use_si = predicted ? p.si_spans : gold_si;
      rel.push_back(relevance(p.rationale, use_cm, use_si));
      coh.push_back(coherence(p.rationale, use_cm, use_si));
      sem.push_back(semantic_similarity(p.rationale, use_cm, use_si, embedder));
      try {
        const Readability rd = readability(p.rationale);
        read.push_back(rd.normalized);
        grade.push_back(rd.grade);
      } catch (const Error& e) {
        if (e.code() != Errc::EmptyText) throw;
        ++counters["rationale_without_words"];
      }
    }
  }

  if (options.classification) {
    report.metrics["classification_f1"] =
        summarize({classification_f1(preds, golds, Label::SelfHarm, options.macro)});
  }
  if (options.spans) {
    report.metrics["cm_span_f1"] = summarize(std::move(cm));
    report.metrics["si_span_f1"] = summarize(std::move(si));
  }
  if (options.rationale) {
    report.metrics["relevance"] = summarize(std::move(rel));
    report.metrics["coherence"] = summarize(std::move(coh));
    report.metrics["readability"] = summarize(std::move(read));
    report.metrics["readability_grade"] = summarize(std::move(grade));
    report.metrics["semantic_similarity"] = summarize(std::move(sem));
  }
  return report;
}

std::string_view to_string(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::FineTune: return "finetune";
    case PipelineMode::ZeroShot: return "zeroshot";
    case PipelineMode::FewShot: return "fewshot";
  }
  return "finetune";
}

std::optional<PipelineMode> parse_pipeline_mode(std::string_view text) {
  if (text == "finetune") return PipelineMode::FineTune;
  if (text == "zeroshot") return PipelineMode::ZeroShot;
  if (text == "fewshot") return PipelineMode::FewShot;
  return std::nullopt;
}

ojson to_json(const PipelineConfig& c) {
  ojson o;
  o["corpus"] = c.corpus_path.string();
  o["lexicon"] = c.lexicon_path.string();
  o["mode"] = to_string(c.mode);
  o["backend"] = to_json(c.backend);
  o["seed"] = c.seed;
  o["runs"] = c.runs;
  o["test_fraction"] = c.test_fraction;
  o["k"] = c.k;
  o["macro"] = c.macro;
  o["remove_articles"] = c.remove_articles;
  o["embedding_dimension"] = c.embedding_dimension;
  o["strict"] = c.load_mode == LoadMode::Strict;
  return o;
}

ojson to_json(const RunManifest& m) {
  ojson o;
  o["tool_version"] = m.tool_version;
  o["config"] = m.config;
  o["input_sha256"] = ojson::object();
  for (const auto& [name, digest] : m.input_sha256) o["input_sha256"][name] = digest;
  o["seeds"] = m.seeds;
  o["stage_timings_ms"] = ojson::array();
  for (const auto& t : m.timings) {
    o["stage_timings_ms"].push_back({{"stage", t.stage}, {"ms", t.ms}});
  }
  return o;
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& timings) : timings_(timings) {}

  template <typename F>
  auto operator()(const std::string& name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    const auto record = [&] {
      timings_.push_back({name, std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - start)
                                    .count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record();
      } else {
        auto result = body();
        record();
        return result;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + name + ": " + e.detail(), e.line());
    }
  }

 private:
  std::vector<StageTiming>& timings_;
};

}  // namespace

ojson comparable(const ojson& report) {
  ojson out = report;
  if (out.contains("meta")) {
    out["meta"].erase("timestamp");
    if (out["meta"].contains("manifest")) out["meta"]["manifest"].erase("stage_timings_ms");
    if (out["meta"].contains("runs")) {
      for (auto& run : out["meta"]["runs"]) run.erase("timestamp");
    }
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.runs < 1) throw Error(Errc::InvalidArgument, "runs must be >= 1");
  PipelineResult result;
  RunManifest& manifest = result.manifest;
  manifest.config = to_json(config);
  StageClock stage(manifest.timings);

  const Corpus corpus = stage("load-corpus", [&] {
    const std::string bytes = io::read_file(config.corpus_path);
    manifest.input_sha256["corpus"] = io::sha256_hex(bytes);
    return parse_corpus(bytes, config.load_mode).corpus;
  });
  const Lexicon lexicon = stage("load-lexicon", [&] {
    if (config.lexicon_path.empty()) {
      if (config.mode == PipelineMode::FineTune) {
        throw Error(Errc::InvalidArgument, "finetune mode needs a lexicon");
      }
      return Lexicon{};
    }
    const std::string bytes = io::read_file(config.lexicon_path);
    manifest.input_sha256["lexicon"] = io::sha256_hex(bytes);
    return parse_lexicon(bytes, format_for_path(config.lexicon_path),
                         config.lexicon_path.string())
        .lexicon;
  });
  if (!config.backend.mock_fixture.empty()) {
    manifest.input_sha256["mock_fixture"] =
        io::sha256_hex(io::read_file(config.backend.mock_fixture));
  }

  Gateway gateway(config.backend);
  HashingEmbedder embedder(config.embedding_dimension);
  ScoreOptions score_options;
  score_options.macro = config.macro;
  score_options.tokenize.remove_articles = config.remove_articles;
  score_options.spans = config.mode == PipelineMode::FineTune;
  score_options.rationale_spans = config.mode == PipelineMode::FineTune
                                      ? RationaleSpans::Predicted
                                      : RationaleSpans::Gold;

  for (int run = 0; run < config.runs; ++run) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(run);
    manifest.seeds.push_back(seed);
    const std::string tag = "run " + std::to_string(seed) + " ";

    const SplitResult split =
        stage(tag + "split", [&] { return split_corpus(corpus, config.test_fraction, seed); });

    const std::vector<PromptInstance> prompts = stage(tag + "build", [&] {
      std::vector<PromptInstance> out;
      std::vector<Post> exemplars;
      if (config.mode == PipelineMode::FewShot) {
        exemplars = select_exemplars(split.train, config.k, seed);
      }
      for (const Post& p : split.test.posts) {
        switch (config.mode) {
          case PipelineMode::FineTune: out.push_back(build_finetune(p, lexicon)); break;
          case PipelineMode::ZeroShot: out.push_back(build_zeroshot(p)); break;
          case PipelineMode::FewShot: out.push_back(build_fewshot(p, exemplars)); break;
        }
      }
      return out;
    });

    const auto outcomes =
        stage(tag + "complete", [&] { return complete_all(gateway, prompts); });
    std::vector<PredictionRecord> records =
        stage(tag + "parse", [&] { return to_records(prompts, outcomes); });

    if (config.mode == PipelineMode::FineTune) {
      stage(tag + "rationale", [&] {
        std::unordered_map<std::string, const Post*> by_id;
        for (const Post& p : split.test.posts) by_id.emplace(p.id, &p);
        std::vector<PromptInstance> rprompts;
        std::vector<std::size_t> index;
        for (std::size_t i = 0; i < records.size(); ++i) {
          if (!records[i].prediction) continue;
          rprompts.push_back(
              build_rationale(*by_id.at(records[i].id), records[i].prediction, lexicon));
          index.push_back(i);
        }
        const auto routs = complete_all(gateway, rprompts);
        for (std::size_t j = 0; j < index.size(); ++j) {
          if (routs[j].completion) {
            records[index[j]].prediction->rationale = routs[j].completion->text;
          } else {
            records[index[j]].error = routs[j].error_message;
          }
        }
      });
    }

    EvalReport report = stage(tag + "score", [&] {
      return score_records(records, split.test, score_options, embedder);
    });
    report.meta["seed"] = seed;
    report.meta["model_id"] = config.backend.model_id;
    report.meta["mode"] = to_string(config.mode);
    report.meta["timestamp"] = utc_timestamp();
    report.meta["train_posts"] = split.train.posts.size();
    report.meta["test_posts"] = split.test.posts.size();

    if (!config.out_dir.empty()) {
      stage(tag + "write", [&] {
        const auto dir = config.out_dir / ("run-" + std::to_string(seed));
        save_prompts(prompts, dir / "prompts.jsonl");
        save_records(records, dir / "predictions.jsonl");
        io::write_file(dir / "report.json", to_json(report).dump(2) + "\n");
      });
    }
    result.runs.push_back(std::move(report));
  }

  EvalReport& agg = result.report;
  if (result.runs.size() == 1) {
    agg = result.runs.front();
  } else {
    for (const auto& [name, _] : result.runs.front().metrics) {
      std::vector<double> means;
      for (const auto& r : result.runs) means.push_back(r.metrics.at(name).mean);
      agg.metrics[name] = summarize(std::move(means));
    }
    for (const auto& r : result.runs) {
      for (const auto& [name, c] : r.counters) agg.counters[name] += c;
    }
    agg.meta["seed"] = config.seed;
    agg.meta["model_id"] = config.backend.model_id;
    agg.meta["mode"] = to_string(config.mode);
    agg.meta["timestamp"] = utc_timestamp();
  }
  agg.meta["runs"] = ojson::array();
  for (const auto& r : result.runs) agg.meta["runs"].push_back(r.meta);
  agg.meta["manifest"] = to_json(manifest);

  if (!config.out_dir.empty()) {
    io::write_file(config.out_dir / "report.json", to_json(agg).dump(2) + "\n");
  }
  return result;
}

}  // namespace emocue
