#include <doctest.h>

#include "emocue/io.hpp"
#include "emocue/pipeline.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace emocue;
using nlohmann::ordered_json;

namespace {

PipelineConfig base_config(PipelineMode mode) {
  PipelineConfig c;
  c.corpus_path = testutil::data("sample_corpus.jsonl");
  c.lexicon_path = testutil::repo_data("cesm_snapshot.tsv");
  c.mode = mode;
  c.seed = 7;
  return c;
}

Post gold_post(std::string id, Label label, std::vector<std::string> cm,
               std::vector<std::string> si) {
  Post p;
  p.id = std::move(id);
  p.label = label;
  for (auto& s : cm) {
    p.body += s + " ";
    p.cm_spans.push_back({s, {}, {}});
  }
  for (auto& s : si) {
    p.body += s + " ";
    p.si_spans.push_back({s, {}, {}});
  }
  p.body += "end";
  return p;
}

}  // namespace

TEST_CASE("pipeline is deterministic for a fixed seed") {
  for (auto mode : {PipelineMode::FineTune, PipelineMode::ZeroShot, PipelineMode::FewShot}) {
    const auto a = run_pipeline(base_config(mode));
    const auto b = run_pipeline(base_config(mode));
    CHECK(comparable(to_json(a.report)) == comparable(to_json(b.report)));
    CHECK(a.report.counters.at("samples") == 6);
    CHECK(a.report.metrics.count("classification_f1") == 1);
    CHECK((mode == PipelineMode::FineTune) == (a.report.metrics.count("cm_span_f1") == 1));
  }
}

TEST_CASE("different seeds select different test sets") {
  auto c = base_config(PipelineMode::ZeroShot);
  const auto a = run_pipeline(c);
  c.seed = 8;
  const auto b = run_pipeline(c);
  CHECK(comparable(to_json(a.report)) != comparable(to_json(b.report)));
}

TEST_CASE("multi-run aggregation uses population variance of run means") {
  auto c = base_config(PipelineMode::FineTune);
  c.runs = 5;
  const auto result = run_pipeline(c);
  REQUIRE(result.runs.size() == 5);
  CHECK(result.manifest.seeds == std::vector<std::uint64_t>{7, 8, 9, 10, 11});
  for (const auto& [name, summary] : result.report.metrics) {
    REQUIRE(summary.per_sample.size() == 5);
    for (std::size_t r = 0; r < 5; ++r) {
      CHECK(summary.per_sample[r] == result.runs[r].metrics.at(name).mean);
    }
    CHECK(std::fabs(summary.mean - oracle::mean(summary.per_sample)) < 1e-12);
    CHECK(std::fabs(summary.variance - oracle::population_variance(summary.per_sample)) < 1e-12);
  }
  std::size_t samples = 0;
  for (const auto& r : result.runs) samples += r.counters.at("samples");
  CHECK(result.report.counters.at("samples") == samples);
}

TEST_CASE("per-sample summaries are consistent") {
  const auto result = run_pipeline(base_config(PipelineMode::FineTune));
  for (const auto& [name, summary] : result.report.metrics) {
    if (name == "classification_f1") {
      CHECK(summary.per_sample.size() == 1);
      continue;
    }
    CHECK(std::fabs(summary.mean - oracle::mean(summary.per_sample)) < 1e-9);
    CHECK(std::fabs(summary.variance - oracle::population_variance(summary.per_sample)) < 1e-9);
  }
}

TEST_CASE("stage failures are tagged") {
  auto c = base_config(PipelineMode::FineTune);
  c.lexicon_path = "/nonexistent/lexicon.tsv";
  try {
    run_pipeline(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FileNotFound);
    CHECK(e.detail().rfind("stage load-lexicon:", 0) == 0);
  }
  c.lexicon_path.clear();
  try {
    run_pipeline(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.detail().rfind("stage load-lexicon:", 0) == 0);
  }
  c = base_config(PipelineMode::ZeroShot);
  c.lexicon_path.clear();
  CHECK_NOTHROW(run_pipeline(c));
}

TEST_CASE("manifest records input digests") {
  const auto c = base_config(PipelineMode::FineTune);
  const auto result = run_pipeline(c);
  CHECK(result.manifest.input_sha256.at("corpus") ==
        io::sha256_hex(io::read_file(c.corpus_path)));
  CHECK(result.manifest.input_sha256.at("lexicon") ==
        io::sha256_hex(io::read_file(c.lexicon_path)));
  CHECK(to_json(result.report)["meta"].contains("manifest"));
  CHECK(result.manifest.tool_version == kToolVersion);
}

TEST_CASE("artifacts replay to the same report") {
  testutil::TempDir dir;
  auto c = base_config(PipelineMode::FineTune);
  c.out_dir = dir.path();
  const auto result = run_pipeline(c);
  const auto run_dir = dir / "run-7";
  REQUIRE(std::filesystem::exists(run_dir / "prompts.jsonl"));
  REQUIRE(std::filesystem::exists(run_dir / "predictions.jsonl"));
  REQUIRE(std::filesystem::exists(run_dir / "report.json"));

  // Completing the saved prompts again reproduces the saved completions.
  // The rationale pass fills in rationale text afterwards.
  const auto prompts = load_prompts(run_dir / "prompts.jsonl");
  Gateway gateway(c.backend);
  const auto records = to_records(prompts, complete_all(gateway, prompts));
  const auto saved = load_records(run_dir / "predictions.jsonl");
  REQUIRE(records.size() == saved.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].id == saved[i].id);
    CHECK(records[i].completion == saved[i].completion);
    REQUIRE(records[i].prediction.has_value());
    REQUIRE(saved[i].prediction.has_value());
    CHECK(records[i].prediction->label == saved[i].prediction->label);
    CHECK(records[i].prediction->cm_spans == saved[i].prediction->cm_spans);
    CHECK(records[i].prediction->si_spans == saved[i].prediction->si_spans);
    CHECK_FALSE(saved[i].prediction->rationale.empty());
  }
  const auto on_disk = ordered_json::parse(io::read_file(run_dir / "report.json"));
  CHECK(on_disk["metrics"] == to_json(result.runs[0])["metrics"]);
}

TEST_CASE("scoring counts unparseable records as wrong") {
  Corpus gold;
  gold.posts = {gold_post("a", Label::SelfHarm, {}, {"cut again"}),
                gold_post("b", Label::NonSelfHarm, {"kill me"}, {})};
  PredictionRecord ok;
  ok.id = "a";
  ok.mode = "finetune";
  Prediction p;
  p.label = Label::SelfHarm;
  p.si_spans = {"cut again"};
  p.rationale = "The post says cut again. It is serious.";
  ok.prediction = p;
  PredictionRecord bad;
  bad.id = "b";
  bad.mode = "finetune";
  bad.completion = "no idea";
  bad.error = "Unparseable";
  HashingEmbedder embedder;
  const auto report = score_records({ok, bad}, gold, ScoreOptions{}, embedder);
  CHECK(report.counters.at("unparseable") == 1);
  CHECK(report.counters.at("samples") == 2);
  // b counted as self-harm: tp 1, fp 1 -> F1 = 2/3
  CHECK(report.metrics.at("classification_f1").mean == doctest::Approx(2.0 / 3.0));
  CHECK(report.metrics.at("si_span_f1").per_sample == std::vector<double>{1.0});
  CHECK(report.metrics.at("relevance").mean == 1.0);

  PredictionRecord stray = ok;
  stray.id = "zzz";
  CHECK(testutil::error_code([&] { score_records({stray}, gold, ScoreOptions{}, embedder); }) ==
        Errc::MisalignedIds);
  CHECK(testutil::error_code([&] { score_records({}, gold, ScoreOptions{}, embedder); }) ==
        Errc::EmptyInput);
}

TEST_CASE("records round trip") {
  testutil::TempDir dir;
  PredictionRecord r;
  r.id = "x";
  r.mode = "zeroshot";
  r.completion = "Classification: self-harm\nRationale: blade";
  r.prediction = parse_prediction(r.completion);
  PredictionRecord failed;
  failed.id = "y";
  failed.mode = "zeroshot";
  failed.error = "timeout";
  save_records({r, failed}, dir / "r.jsonl");
  const auto back = load_records(dir / "r.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].prediction == r.prediction);
  CHECK(back[1].error == "timeout");
  CHECK_FALSE(back[1].prediction.has_value());
}
