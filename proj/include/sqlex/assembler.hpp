// Deterministic translation of role and span label sequences into a
// pseudo SQL query whose columns are still question text.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sqlex/labels.hpp"
#include "sqlex/types.hpp"

namespace sqlex {

enum class MentionKind { kSelCol, kCondCol, kValue, kAgg, kOp };

struct Mention {
  MentionKind kind = MentionKind::kSelCol;
  int id = 0;  // aggregation or operator id for kAgg / kOp
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [begin, end)
  std::string text;
};

struct PseudoCondition {
  std::optional<Mention> column;  // absent for an implicit column
  int op = kOpEq;
  std::string value;
  Mention value_mention;
};

struct PseudoSql {
  std::optional<Mention> select;
  int agg = kAggNone;
  std::vector<PseudoCondition> conds;

  // Diagnostics.
  std::size_t dropped_mentions = 0;    // outside every span, nothing near
  std::size_t dropped_conditions = 0;  // Cond span without a value
  bool multiple_aggs = false;          // more than one AGG run in the select
};

/// Maximum gap, in tokens, between a stray mention and the span it joins.
inline constexpr std::size_t kAttachDistance = 3;

/// Throws Error("assemble") when the sequences differ in length from the
/// tokens or are not BIO-valid, and when there is neither a Sel span nor an
/// S mention ("no select target").
PseudoSql assemble(const Example& example, const LabelSeq& roles,
                   const LabelSeq& spans);

nlohmann::json pseudo_to_json(const PseudoSql& pseudo);

}  // namespace sqlex
