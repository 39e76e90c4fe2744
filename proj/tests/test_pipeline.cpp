#include <filesystem>

#include "doctest.h"
#include "sqlex/corpus.hpp"
#include "sqlex/executor.hpp"
#include "sqlex/pipeline.hpp"
#include "support.hpp"

using namespace sqlex;
using namespace testing_support;

namespace {

const Models& small_models() {
  static const Models m = [] {
    const auto& fx = fixtures();
    PipelineConfig cfg;
    cfg.crf_epochs = 25;
    const std::vector<Example> head(fx.train.begin(), fx.train.begin() + 150);
    return train_models(head, fx.tables, cfg);
  }();
  return m;
}

std::vector<std::string> lower_tokens(const Example& ex) {
  std::vector<std::string> out;
  for (const auto& t : ex.tokens) out.push_back(t.lower);
  return out;
}

}  // namespace

TEST_CASE("configuration parsing") {
  const auto c = PipelineConfig::from_json({{"k", 3}, {"eg", true}, {"tables", "t.jsonl"}});
  CHECK(c.nbest_k == 3);
  CHECK(c.eg);
  CHECK(c.tables == "t.jsonl");
  CHECK(c.em_iters == 5);
  CHECK(PipelineConfig::from_json(c.to_json()).to_json() == c.to_json());

  PipelineConfig base;
  base.seed = 42;
  CHECK(PipelineConfig::from_json({{"ae", true}}, base).seed == 42);

  CHECK_THROWS_AS(PipelineConfig::from_json({{"bogus", 1}}), Error);
  PipelineConfig bad;
  bad.nbest_k = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("models round trip through a directory") {
  const Models& m = small_models();
  const auto dir = std::filesystem::temp_directory_path() / "sqlex_test_models";
  std::filesystem::remove_all(dir);
  m.save(dir, PipelineConfig{});
  for (const char* f : {"aligner.model", "roles.crf", "spans.crf", "rules.json", "manifest.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const Models back = Models::load(dir);
  CHECK(back.rules == m.rules);

  const auto& fx = fixtures();
  for (std::size_t i = 0; i < 15; ++i) {
    const Example& ex = fx.dev[i];
    const Table& t = fx.tables.at(ex.table_id);
    const auto a = predict_example(m, ex, t, {true, true, 4, {}});
    const auto b = predict_example(back, ex, t, {true, true, 4, {}});
    CHECK(a.query == b.query);
  }

  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  manifest["format_version"] = kModelFormatVersion + 1;
  write_file(dir / "manifest.json", manifest.dump());
  try {
    Models::load(dir);
    FAIL("expected a version error");
  } catch (const Error& e) {
    CHECK(e.kind() == "version");
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(Models::load(dir), Error);
}

TEST_CASE("prediction contracts for execution guidance and AGG correction") {
  const Models& m = small_models();
  const auto& fx = fixtures();
  for (std::size_t i = 0; i < 40; ++i) {
    const Example& ex = fx.dev[i];
    const Table& t = fx.tables.at(ex.table_id);
    CAPTURE(ex.question);

    const auto plain = predict_example(m, ex, t, {false, false, 4, {}});
    if (!plain.query) {
      CHECK(!plain.error.empty());
      continue;
    }
    REQUIRE(!plain.candidates.empty());
    CHECK(*plain.query == plain.candidates.front().query);

    const auto eg = predict_example(m, ex, t, {true, false, 4, {}});
    REQUIRE(eg.query);
    REQUIRE(!eg.candidates.empty());
    CHECK(eg.candidates.front().query == *plain.query);
    CHECK(*eg.query == eg_select(eg.candidates, t).query);
    CHECK(eg.candidates.size() >= plain.candidates.size());

    const auto ae = predict_example(m, ex, t, {true, true, 4, {}});
    REQUIRE(ae.query);
    SqlQuery expect = *eg.query;
    expect.agg = apply_rules(m.rules, lower_tokens(ex), expect.agg);
    CHECK(*ae.query == expect);
  }
}

TEST_CASE("oracle pipeline and file-level commands") {
  const auto& fx = fixtures();
  const auto aligner = train_em_aligner(fx.train, fx.tables, {});
  const std::vector<Example> some(fx.dev.begin(), fx.dev.begin() + 60);
  const EvalReport r = oracle_pipeline(aligner, some, fx.tables);
  CHECK(r.mode == EvalMode::kOracle);
  CHECK(r.lf.fraction() >= 0.9);
  CHECK(oracle_predictions(aligner, some, fx.tables).size() == some.size());

  const auto work = std::filesystem::temp_directory_path() / "sqlex_test_cmd";
  std::filesystem::remove_all(work);
  std::filesystem::create_directories(work);
  PipelineConfig cfg;
  cfg.train = fixture_dir() / "train.jsonl";
  cfg.tables = fixture_dir() / "tables.jsonl";
  cfg.output = work / "ann.jsonl";
  const AnnotationReport rep = cmd_annotate(cfg);
  CHECK(rep.dropped == 0);
  CHECK(rep.annotated == fx.train.size());
  CHECK(read_jsonl(work / "ann.jsonl").size() == fx.train.size());
  CHECK(std::filesystem::exists(work / "ann.report.json"));

  const auto res = cmd_exec(cfg.tables, {{"table_id", "1-10000-1"},
                                         {"sql", query_to_json(worked_query())}});
  CHECK(res["result"]["kind"] == "scalar");
  CHECK_THROWS_AS(cmd_exec(cfg.tables, {{"table_id", "nope"}, {"sql", query_to_json(worked_query())}}),
                  Error);

  write_file(work / "orphan.jsonl",
             R"({"question":"q","table_id":"nope","sql":{"sel":0,"agg":0,"conds":[]}})"
             "\n");
  CHECK_THROWS_AS(load_checked_examples(work / "orphan.jsonl", fx.tables), Error);
  std::filesystem::remove_all(work);
}
