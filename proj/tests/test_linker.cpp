#include <cmath>

#include "doctest.h"
#include "sqlex/assembler.hpp"
#include "sqlex/linker.hpp"
#include "support.hpp"

using namespace sqlex;
using namespace testing_support;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("select score for a paraphrased header") {
  const Table t = swim_table();
  const LinkQuery lq{"50m splits", SpanKind::kSelect, kWorkedQuestion, "Split (50m)", 3,
                     ColumnType::kReal, &t, std::nullopt};
  const LinkFeatures f = link_features(lq);
  CHECK(f.dice == doctest::Approx(14.0 / 17.0));
  CHECK(f.jaccard == doctest::Approx(1.0 / 3.0));
  CHECK(f.exact == 0.0);
  CHECK(f.containment == 0.0);
  CHECK(f.type == 0.0);
  const double want = sigmoid(4.0 * 14.0 / 17.0 + 2.0 / 3.0 - 3.0);
  CHECK(score(lq) == doctest::Approx(want));
  CHECK(score(lq) > 0.5);
}

TEST_CASE("filter features use the condition value") {
  const Table t = swim_table();
  const LinkQuery lq{"lanes", SpanKind::kFilter, kWorkedQuestion, "Lane", 0,
                     ColumnType::kReal, &t, std::string("8")};
  const LinkFeatures f = link_features(lq);
  CHECK(f.dice == doctest::Approx(6.0 / 9.0));
  CHECK(f.type == 1.0);
  CHECK(f.containment == doctest::Approx(1.0 / 3.0));
  CHECK(score(lq) == doctest::Approx(sigmoid(4.0 * 6.0 / 9.0 + 5.0 / 3.0 + 1.0 - 3.0)));
}

TEST_CASE("implicit columns are found through cell containment") {
  const Table t = swim_table();
  const auto ranked = rank_headers("Josefin Lillhage", SpanKind::kFilter, "", t.schema, &t,
                                   std::nullopt);
  REQUIRE(ranked.size() == 5);
  CHECK(ranked[0].header_index == 1);
  CHECK(ranked[0].basis == LinkBasis::kCellContainment);
  CHECK(ranked[0].score == doctest::Approx(sigmoid(5.0 * 2.0 / 3.0 + 1.0 - 3.0)));
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].score >= ranked[i].score);
}

TEST_CASE("ties resolve to the lowest column index") {
  TableSchema s{"dup", {"Score", "Score", "Other"},
                {ColumnType::kReal, ColumnType::kReal, ColumnType::kText}};
  const auto ranked = rank_headers("score", SpanKind::kSelect, "", s, nullptr, std::nullopt);
  CHECK(ranked[0].header_index == 0);
  CHECK(ranked[1].header_index == 1);
  CHECK(ranked[0].score == ranked[1].score);

  TableSchema one{"one", {"Anything"}, {ColumnType::kText}};
  PseudoSql p;
  p.select = Mention{MentionKind::kSelCol, 0, {{0, 1}}, "unrelated"};
  const auto c = link(p, one, nullptr);
  REQUIRE(c.size() == 1);
  CHECK(c[0].query.sel == 0);
}

TEST_CASE("linking the worked pseudo query recovers the gold query") {
  const Table t = swim_table();
  PseudoSql p;
  p.select = Mention{MentionKind::kSelCol, 0, {{6, 8}}, "50m splits"};
  p.agg = kAggSum;
  PseudoCondition c0;
  c0.value = "Josefin Lillhage";
  PseudoCondition c1;
  c1.column = Mention{MentionKind::kCondCol, 0, {{12, 13}}, "lanes"};
  c1.op = kOpGt;
  c1.value = "8";
  p.conds = {c0, c1};
  const auto cands = link(p, t.schema, &t, kWorkedQuestion, {4, 64, {}});
  REQUIRE(!cands.empty());
  CHECK(cands[0].query == worked_query());
  CHECK(cands.size() <= 64);
  for (std::size_t i = 1; i < cands.size(); ++i) CHECK(cands[i - 1].score >= cands[i].score);
  CHECK(cands.size() == 64);  // 4 x 4 x 4

  PseudoSql none;
  CHECK_THROWS_AS(link(none, t.schema, &t), Error);
  CHECK_THROWS_AS(link(p, TableSchema{}, nullptr), Error);
}
