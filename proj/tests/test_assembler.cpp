#include "doctest.h"
#include "sqlex/assembler.hpp"
#include "support.hpp"

using namespace sqlex;
using namespace testing_support;

namespace {

LabelSeq roles(const std::vector<std::string>& n) { return LabelSet::roles().ids(n); }
LabelSeq spans(const std::vector<std::string>& n) { return LabelSet::spans().ids(n); }

}  // namespace

TEST_CASE("worked example assembles into the expected pseudo query") {
  const Example ex = make_example(kWorkedQuestion, "t1");
  const auto r = roles({"O", "O", "O", "B-AGG4", "I-AGG4", "O", "B-S", "I-S", "O", "B-V",
                        "I-V", "O", "B-C", "B-OP1", "B-V", "O"});
  const auto s = spans({"O", "O", "O", "B-Sel", "I-Sel", "I-Sel", "I-Sel", "I-Sel", "O",
                        "B-Cond", "I-Cond", "O", "B-Cond", "I-Cond", "I-Cond", "O"});
  const PseudoSql p = assemble(ex, r, s);
  REQUIRE(p.select);
  CHECK(p.select->text == "50m splits");
  CHECK(p.agg == kAggSum);
  REQUIRE(p.conds.size() == 2);
  CHECK_FALSE(p.conds[0].column);
  CHECK(p.conds[0].op == kOpEq);
  CHECK(p.conds[0].value == "Josefin Lillhage");
  REQUIRE(p.conds[1].column);
  CHECK(p.conds[1].column->text == "lanes");
  CHECK(p.conds[1].op == kOpGt);
  CHECK(p.conds[1].value == "8");
  CHECK(p.dropped_mentions == 0);
  CHECK(p.dropped_conditions == 0);

  const auto j = pseudo_to_json(p);
  CHECK(j["agg"] == 4);
  CHECK(j["conds"][0]["column"].is_null());
}

TEST_CASE("a lone select mention is enough") {
  const Example ex = make_example("Name ?", "t1");
  const PseudoSql p = assemble(ex, roles({"B-S", "O"}), spans({"O", "O"}));
  REQUIRE(p.select);
  CHECK(p.select->text == "Name");
  CHECK(p.agg == kAggNone);
  CHECK(p.conds.empty());
}

TEST_CASE("stray mentions attach to a nearby span or are dropped") {
  const Example ex = make_example("a b c d e f g h i j", "t1");
  // V at 4 is one token right of the Cond span [1, 3): attaches.
  // C at 9 is six tokens away: dropped.
  const auto r = roles({"B-S", "B-OP2", "O", "O", "B-V", "O", "O", "O", "O", "B-C"});
  const auto s = spans({"B-Sel", "B-Cond", "I-Cond", "O", "O", "O", "O", "O", "O", "O"});
  const PseudoSql p = assemble(ex, r, s);
  REQUIRE(p.conds.size() == 1);
  CHECK(p.conds[0].value == "e");
  CHECK(p.conds[0].op == kOpLt);
  CHECK_FALSE(p.conds[0].column);
  CHECK(p.dropped_mentions == 1);
}

TEST_CASE("conditions without a value are dropped") {
  const Example ex = make_example("x in lanes above", "t1");
  const PseudoSql p = assemble(ex, roles({"B-S", "O", "B-C", "B-OP1"}),
                               spans({"B-Sel", "O", "B-Cond", "I-Cond"}));
  CHECK(p.conds.empty());
  CHECK(p.dropped_conditions == 1);
}

TEST_CASE("first aggregation wins and conflicts are flagged") {
  const Example ex = make_example("total max time", "t1");
  const PseudoSql p = assemble(ex, roles({"B-AGG4", "B-AGG1", "B-S"}),
                               spans({"B-Sel", "I-Sel", "I-Sel"}));
  CHECK(p.agg == kAggSum);
  CHECK(p.multiple_aggs);
}

TEST_CASE("malformed label sequences are rejected") {
  const Example ex = make_example("a b", "t1");
  CHECK_THROWS_AS(assemble(ex, roles({"O"}), spans({"O", "O"})), Error);
  CHECK_THROWS_AS(assemble(ex, roles({"O", "I-S"}), spans({"O", "O"})), Error);
  CHECK_THROWS_AS(assemble(ex, roles({"O", "B-V"}), spans({"O", "B-Cond"})), Error);
}
