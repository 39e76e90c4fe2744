// Execution of single-table WikiSQL queries over in-memory tables, and
// execution-guided candidate selection.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sqlex/linker.hpp"
#include "sqlex/types.hpp"

namespace sqlex {

struct ExecutionResult {
  enum class Kind { kScalar, kList, kError, kEmpty };

  Kind kind = Kind::kEmpty;
  double scalar = 0.0;
  std::vector<Cell> list;
  std::string error;

  bool usable() const { return kind == Kind::kScalar || kind == Kind::kList; }
};

/// Conditions are a conjunction. '=' compares numerically when both sides
/// parse as numbers, otherwise as normalized strings (case-insensitive).
/// '>' and '<' compare numerically and skip rows whose cell does not parse.
/// Aggregates other than COUNT reduce the numeric cells among the matched
/// rows; no such cell (or no matched row) gives an empty result. COUNT of
/// no rows is the scalar 0. Invalid indices give an error result.
ExecutionResult execute(const SqlQuery& query, const Table& table);

/// Scalars equal within `tolerance`; lists equal as multisets of normalized
/// cells; empty equals empty; errors never equal anything.
bool results_equal(const ExecutionResult& a, const ExecutionResult& b,
                   double tolerance = 1e-6);

/// The first candidate (input is best first) whose execution is neither an
/// error nor empty, else the first candidate. Throws Error("input") on an
/// empty list.
const ScoredQuery& eg_select(const std::vector<ScoredQuery>& candidates,
                             const Table& table);

nlohmann::json result_to_json(const ExecutionResult& result);

}  // namespace sqlex
