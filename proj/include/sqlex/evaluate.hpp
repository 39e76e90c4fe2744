// Logical-form, execution and slot-wise accuracy.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "sqlex/types.hpp"

namespace sqlex {

struct CanonicalQuery {
  int sel = 0;
  int agg = 0;
  std::vector<std::tuple<int, int, std::string>> conds;  // sorted

  friend bool operator==(const CanonicalQuery&, const CanonicalQuery&) = default;
};

/// Sorts conditions by (column, op, normalized value). Values are
/// lowercased, trimmed and whitespace-collapsed; numbers are reformatted
/// ("26.50" -> "26.5") on real columns, or on every column when no schema
/// is given.
CanonicalQuery canonicalize(const SqlQuery& query,
                            const TableSchema* schema = nullptr);

/// Re-expresses a canonical form as a query, so canonicalize can be applied
/// to its own output.
SqlQuery to_query(const CanonicalQuery& canonical);

enum class EvalMode { kPlain, kEg, kOracle };
std::string_view eval_mode_name(EvalMode mode);

struct EvalReport {
  struct Counter {
    std::size_t correct = 0;
    std::size_t total = 0;
    double fraction() const { return total ? static_cast<double>(correct) / total : 0.0; }
  };
  Counter lf, ex, s_col, s_agg, w_no, w_col, w_op, w_val;
  EvalMode mode = EvalMode::kPlain;
  std::size_t missing = 0;  // examples without a prediction

  nlohmann::json to_json() const;
  /// Two aligned tables: LF/EX, then the six slot accuracies.
  std::string to_text() const;
};

/// A missing prediction is wrong on every metric. Gold and prediction run
/// against the table named by the matching gold example. Throws
/// Error("input") when the lists differ in length.
EvalReport evaluate(const std::vector<std::optional<SqlQuery>>& predictions,
                    const std::vector<Example>& gold, const TableSet& tables,
                    EvalMode mode = EvalMode::kPlain);

}  // namespace sqlex
