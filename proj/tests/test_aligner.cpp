#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "sqlex/aligner.hpp"
#include "sqlex/corpus.hpp"
#include "support.hpp"

using namespace sqlex;
using namespace testing_support;

namespace {

// Straightforward dense IBM Model 1 with a null source word, same smoothing.
struct DenseEm {
  std::vector<std::string> src{kNullToken}, tgt;
  std::map<std::pair<std::string, std::string>, double> t;  // (f, e)
  std::vector<double> history;

  double p(const std::string& f, const std::string& e) const { return t.at({f, e}); }

  DenseEm(const std::vector<ParallelPair>& corpus, int iters, double alpha) {
    std::set<std::string> seen_s{kNullToken}, seen_t;
    for (const auto& pr : corpus) {
      for (const auto& e : pr.sql) if (seen_s.insert(e).second) src.push_back(e);
      for (const auto& f : pr.question) if (seen_t.insert(f).second) tgt.push_back(f);
    }
    const double V = static_cast<double>(tgt.size());
    for (const auto& e : src) for (const auto& f : tgt) t[{f, e}] = 1.0 / V;
    auto ll = [&] {
      double s = 0;
      for (const auto& pr : corpus) {
        for (const auto& f : pr.question) {
          double d = p(f, kNullToken);
          for (const auto& e : pr.sql) d += p(f, e);
          s += std::log(d / static_cast<double>(pr.sql.size() + 1));
        }
      }
      return s;
    };
    history.push_back(ll());
    for (int it = 0; it < iters; ++it) {
      std::map<std::pair<std::string, std::string>, double> c;
      std::map<std::string, double> tot;
      for (const auto& pr : corpus) {
        std::vector<std::string> s{kNullToken};
        s.insert(s.end(), pr.sql.begin(), pr.sql.end());
        for (const auto& f : pr.question) {
          double d = 0;
          for (const auto& e : s) d += p(f, e);
          for (const auto& e : s) {
            c[{f, e}] += p(f, e) / d;
            tot[e] += p(f, e) / d;
          }
        }
      }
      for (const auto& e : src) {
        for (const auto& f : tgt) {
          t[{f, e}] = (c[{f, e}] + alpha) / (tot[e] + alpha * V);
        }
      }
      history.push_back(ll());
    }
  }
};

std::vector<ParallelPair> toy_corpus() {
  return {
      {{"total", "sum", "of", "time", "above", "8"}, {"sum", "time", "lane", ">", "8"}},
      {{"sum", "of", "splits", "in", "lanes", "above", "4"}, {"sum", "split", "50m", "lane", ">", "4"}},
      {{"what", "time", "above", "9"}, {"time", "lane", ">", "9"}},
      {{"sum", "lane", "for", "sweden"}, {"sum", "lane", "nationality", "=", "sweden"}},
      {{"time", "below", "3"}, {"time", "lane", "<", "3"}},
      {{"highest", "time"}, {"max", "time"}},
  };
}

std::vector<std::size_t> link_tokens(const Alignment& a, SlotKind k, int cond = -1) {
  const AlignmentLink* l = a.find(k, cond);
  REQUIRE(l != nullptr);
  return l->aligned() ? l->tokens : std::vector<std::size_t>{};
}

}  // namespace

TEST_CASE("string matching grounds values exactly and columns partially") {
  const Table t = swim_table();
  const Example ex = make_example(kWorkedQuestion, "t1", worked_query());
  const Alignment a = string_match_pass(ex, t.schema);

  const AlignmentLink* v0 = a.find(SlotKind::kValue, 0);
  REQUIRE(v0);
  CHECK(v0->provenance == Provenance::kExact);
  CHECK(v0->tokens == std::vector<std::size_t>{9, 10});
  const AlignmentLink* v1 = a.find(SlotKind::kValue, 1);
  REQUIRE(v1);
  CHECK(v1->provenance == Provenance::kExact);
  CHECK(v1->tokens == std::vector<std::size_t>{14});

  // "50m splits" vs "Split (50m)": Dice 14/17, the best n-gram.
  const AlignmentLink* sel = a.find(SlotKind::kSelCol);
  REQUIRE(sel);
  CHECK(sel->provenance == Provenance::kPartial);
  CHECK(sel->tokens == std::vector<std::size_t>{6, 7});

  // "lanes" vs "Lane": Dice 6/9.
  const AlignmentLink* lane = a.find(SlotKind::kCondCol, 1);
  REQUIRE(lane);
  CHECK(lane->provenance == Provenance::kPartial);
  CHECK(lane->tokens == std::vector<std::size_t>{12});

  // "Name" has no surface form in the question.
  CHECK_FALSE(a.find(SlotKind::kCondCol, 0)->aligned());
  // NONE aggregation and '=' are never slots.
  CHECK(a.find(SlotKind::kOp, 0) == nullptr);

  const auto used = a.consumed(ex.tokens.size());
  for (std::size_t i : {6u, 7u, 9u, 10u, 12u, 14u}) CHECK(used[i]);
  CHECK_FALSE(used[4]);
}

TEST_CASE("EM translation table matches a dense reference implementation") {
  const auto corpus = toy_corpus();
  for (double alpha : {0.0, 0.01, 0.5}) {
    CAPTURE(alpha);
    const auto model = AlignmentModel::train(corpus, {5, alpha});
    const DenseEm ref(corpus, 5, alpha);
    for (const auto& e : ref.src) {
      for (const auto& f : ref.tgt) {
        CHECK(model.prob(f, e) == doctest::Approx(ref.p(f, e)).epsilon(1e-10));
      }
      CHECK(model.row_mass(e) == doctest::Approx(1.0));
    }
    REQUIRE(model.history().size() == ref.history.size());
    for (std::size_t i = 0; i < ref.history.size(); ++i) {
      CHECK(model.history()[i] == doctest::Approx(ref.history[i]).epsilon(1e-10));
    }
  }
  const auto model = AlignmentModel::train(corpus, {});
  CHECK(model.prob("above", "unseen") == 0.0);
  CHECK_FALSE(model.has_source("unseen"));
  CHECK_THROWS_AS(AlignmentModel::train({}, {}), Error);
}

TEST_CASE("EM history does not decrease on the toy and fixture corpora") {
  const auto model = AlignmentModel::train(toy_corpus(), {10, 0.01});
  for (std::size_t i = 1; i < model.history().size(); ++i) {
    CHECK(model.history()[i] >= model.history()[i - 1] - 1e-9);
  }
  const auto& fx = fixtures();
  const auto fixture_model = train_em_aligner(fx.train, fx.tables, {5, 0.01});
  const auto& h = fixture_model.history();
  REQUIRE(h.size() == 6);
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] >= h[i - 1] - 1e-9);
}

TEST_CASE("a single identical pair gives probability one") {
  const auto model = AlignmentModel::train({{{"x"}, {"x"}}}, {5, 0.0});
  CHECK(model.prob("x", "x") == doctest::Approx(1.0));
  CHECK(model.prob("x", kNullToken) == doctest::Approx(1.0));
}

TEST_CASE("EM model save and load round trip") {
  const auto model = AlignmentModel::train(toy_corpus(), {});
  const auto path = std::filesystem::temp_directory_path() / "sqlex_test_align.model";
  model.save(path);
  const auto back = AlignmentModel::load(path);
  for (const auto& e : model.source_vocab()) {
    for (const auto& f : model.target_vocab()) {
      CHECK(back.prob(f, e) == doctest::Approx(model.prob(f, e)).epsilon(1e-12));
    }
  }
  write_file(path, "garbage\n");
  CHECK_THROWS_AS(AlignmentModel::load(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("EM alignment grounds aggregation and operator words") {
  const Table t = swim_table();
  TableSet tables;
  tables.add(t);
  std::vector<Example> corpus;
  const std::vector<std::pair<std::string, SqlQuery>> items = {
      {"What is the sum of time for Alice Mills?", {4, kAggSum, {{1, kOpEq, "Alice Mills"}}}},
      {"What is the sum of lane for Sweden?", {0, kAggSum, {{2, kOpEq, "Sweden"}}}},
      {"What time has a lane above 4?", {4, kAggNone, {{0, kOpGt, "4"}}}},
      {"What name has a lane above 8?", {1, kAggNone, {{0, kOpGt, "8"}}}},
      {"What is the sum of time with a lane above 4?", {4, kAggSum, {{0, kOpGt, "4"}}}},
      {"Which name has a time below 55?", {1, kAggNone, {{4, kOpLt, "55"}}}},
  };
  for (const auto& [qtext, q] : items) corpus.push_back(make_example(qtext, "t1", q));
  const auto model = train_em_aligner(corpus, tables, {5, 0.01});

  const Example ex = make_example(kWorkedQuestion, "t1", worked_query());
  const Alignment pass1 = string_match_pass(ex, t.schema);
  const Alignment pass2 = em_align(model, ex, t.schema, pass1);
  const auto agg = link_tokens(pass2, SlotKind::kAgg);
  CHECK(std::find(agg.begin(), agg.end(), 4u) != agg.end());
  CHECK(pass2.find(SlotKind::kAgg)->provenance == Provenance::kEm);
  CHECK(link_tokens(pass2, SlotKind::kOp, 1) == std::vector<std::size_t>{13});
  // Earlier links are preserved untouched.
  CHECK(link_tokens(pass2, SlotKind::kSelCol) == std::vector<std::size_t>{6, 7});

  // MAX never appears on the SQL side, so the aggregation slot stays open.
  const Example maxq = make_example("What is the highest time for Alice Mills?", "t1",
                                    SqlQuery{4, kAggMax, {{1, kOpEq, "Alice Mills"}}});
  const Alignment m = em_align(model, maxq, t.schema, string_match_pass(maxq, t.schema));
  CHECK_FALSE(m.find(SlotKind::kAgg)->aligned());
}

TEST_CASE("similarity fallback") {
  TableSchema schema = swim_table().schema;
  // "nationalities" is close enough for trigram matching already.
  const Example plural = make_example("What nationalities swam in lane 8?", "t1",
                                      SqlQuery{2, kAggNone, {{0, kOpEq, "8"}}});
  CHECK(string_match_pass(plural, schema).find(SlotKind::kSelCol)->provenance ==
        Provenance::kPartial);

  // "lnae" shares no trigram with "lane"; edit similarity is exactly 0.5.
  const Example ex = make_example("What nationality swam in lnae 8?", "t1",
                                  SqlQuery{2, kAggNone, {{0, kOpEq, "8"}}});
  const Alignment p1 = string_match_pass(ex, schema);
  CHECK_FALSE(p1.find(SlotKind::kCondCol, 0)->aligned());
  const Alignment fb = similarity_fallback(ex, p1);
  const AlignmentLink* col = fb.find(SlotKind::kCondCol, 0);
  REQUIRE(col);
  CHECK(col->provenance == Provenance::kFallback);
  CHECK(col->tokens == std::vector<std::size_t>{4});

  // "lane" is already taken by the select column; nothing else resembles
  // "name", so the condition column is left implicit.
  const Example who = make_example("Who is Josefin Lillhage's lane?", "t1",
                                   SqlQuery{0, kAggNone, {{1, kOpEq, "Josefin Lillhage"}}});
  const Alignment wp = string_match_pass(who, schema);
  REQUIRE(wp.find(SlotKind::kSelCol)->aligned());
  CHECK(wp.find(SlotKind::kSelCol)->tokens == std::vector<std::size_t>{4});
  const Alignment w = similarity_fallback(who, wp);
  CHECK_FALSE(w.find(SlotKind::kCondCol, 0)->aligned());
}

TEST_CASE("label generation for a hand-built alignment") {
  const Example ex = make_example(kWorkedQuestion, "t1", worked_query());
  Alignment a;
  auto add = [&](SlotKind k, int cond, std::vector<std::size_t> toks) {
    AlignmentLink l;
    l.kind = k;
    l.cond = cond;
    l.tokens = std::move(toks);
    l.provenance = Provenance::kExact;
    a.links.push_back(l);
  };
  add(SlotKind::kSelCol, -1, {6, 7});
  add(SlotKind::kAgg, -1, {3, 4});
  AlignmentLink name;
  name.kind = SlotKind::kCondCol;
  name.cond = 0;
  a.links.push_back(name);  // implicit
  add(SlotKind::kValue, 0, {9, 10});
  add(SlotKind::kCondCol, 1, {12});
  add(SlotKind::kOp, 1, {13});
  add(SlotKind::kValue, 1, {14});

  const LabelOutcome out = generate_labels(ex, a);
  REQUIRE(out.labeled);
  const auto& roles = LabelSet::roles();
  const auto& spans = LabelSet::spans();
  CHECK(roles.to_names(out.labeled->roles) ==
        std::vector<std::string>{"O", "O", "O", "B-AGG4", "I-AGG4", "O", "B-S", "I-S", "O",
                                 "B-V", "I-V", "O", "B-C", "B-OP1", "B-V", "O"});
  CHECK(spans.to_names(out.labeled->spans) ==
        std::vector<std::string>{"O", "O", "O", "B-Sel", "I-Sel", "I-Sel", "I-Sel", "I-Sel",
                                 "O", "B-Cond", "I-Cond", "O", "B-Cond", "I-Cond", "I-Cond",
                                 "O"});
  CHECK(is_bio_valid(out.labeled->roles));
  CHECK(is_bio_valid(out.labeled->spans));

  Alignment missing = a;
  missing.links[3].provenance = Provenance::kUnaligned;
  CHECK(generate_labels(ex, missing).drop_reason == "unaligned_value");

  Alignment reused = a;
  reused.links[4].tokens = {10};
  CHECK(generate_labels(ex, reused).drop_reason == "token_reused");
}

TEST_CASE("annotation of the fixture corpus") {
  const auto& fx = fixtures();
  const auto model = train_em_aligner(fx.train, fx.tables, {5, 0.01});
  const auto ann = annotate_corpus(model, fx.train, fx.tables);
  CHECK(ann.report.total == fx.train.size());
  CHECK(ann.report.dropped == 0);
  for (const auto& rec : ann.records) {
    REQUIRE(rec.outcome.labeled);
    CHECK(is_bio_valid(rec.outcome.labeled->roles));
    CHECK(is_bio_valid(rec.outcome.labeled->spans));
    CHECK(rec.outcome.labeled->roles.size() == rec.example.tokens.size());
    // Round trip through the JSONL record.
    const auto back = labeled_from_json(annotation_to_json(rec));
    REQUIRE(back);
    CHECK(back->roles == rec.outcome.labeled->roles);
    CHECK(back->spans == rec.outcome.labeled->spans);
  }
  // The worked example comes out with the hand-derived labels.
  const auto& first = ann.records.front();
  REQUIRE(first.example.question == kWorkedQuestion);
  CHECK(LabelSet::roles().to_names(first.outcome.labeled->roles) ==
        std::vector<std::string>{"O", "O", "O", "B-AGG4", "I-AGG4", "O", "B-S", "I-S", "O",
                                 "B-V", "I-V", "O", "B-C", "B-OP1", "B-V", "O"});

  Example orphan = fx.train.front();
  orphan.table_id = "missing";
  const auto dropped = annotate_corpus(model, {orphan}, fx.tables);
  CHECK(dropped.report.dropped == 1);
  CHECK(dropped.report.drop_reasons.at("unknown_table") == 1);
}
