#include "sqlex/executor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sqlex/text.hpp"

namespace sqlex {
namespace {

std::optional<double> cell_number(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  return text::parse_number(std::get<std::string>(cell));
}

bool matches(const Cell& cell, const Condition& cond) {
  const auto lhs = cell_number(cell);
  const auto rhs = text::parse_number(cond.value);
  switch (cond.op) {
    case kOpEq:
      if (lhs && rhs) return *lhs == *rhs;
      return text::normalize_value(cell_to_string(cell)) ==
             text::normalize_value(cond.value);
    case kOpGt:
      return lhs && rhs && *lhs > *rhs;
    case kOpLt:
      return lhs && rhs && *lhs < *rhs;
  }
  return false;
}

std::vector<std::string> normalized_list(const std::vector<Cell>& cells) {
  std::vector<std::string> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(text::normalize_value(cell_to_string(c)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ExecutionResult execute(const SqlQuery& query, const Table& table) {
  ExecutionResult result;
  try {
    validate_query(query, table.schema);
  } catch (const Error& e) {
    result.kind = ExecutionResult::Kind::kError;
    result.error = e.what();
    return result;
  }

  std::vector<const std::vector<Cell>*> rows;
  for (const auto& row : table.rows) {
    const bool keep = std::all_of(
        query.conds.begin(), query.conds.end(),
        [&](const Condition& c) { return matches(row[c.column], c); });
    if (keep) rows.push_back(&row);
  }

  if (query.agg == kAggCount) {
    result.kind = ExecutionResult::Kind::kScalar;
    result.scalar = static_cast<double>(rows.size());
    return result;
  }
  if (rows.empty()) return result;  // empty
  if (query.agg == kAggNone) {
    result.kind = ExecutionResult::Kind::kList;
    for (const auto* row : rows) result.list.push_back((*row)[query.sel]);
    return result;
  }

  std::vector<double> values;
  for (const auto* row : rows) {
    if (auto v = cell_number((*row)[query.sel])) values.push_back(*v);
  }
  if (values.empty()) return result;
  result.kind = ExecutionResult::Kind::kScalar;
  switch (query.agg) {
    case kAggMax:
      result.scalar = *std::max_element(values.begin(), values.end());
      break;
    case kAggMin:
      result.scalar = *std::min_element(values.begin(), values.end());
      break;
    case kAggSum:
    case kAggAvg: {
      double sum = 0.0;
      for (double v : values) sum += v;
      result.scalar = query.agg == kAggSum ? sum : sum / values.size();
      break;
    }
    default:
      break;
  }
  return result;
}

bool results_equal(const ExecutionResult& a, const ExecutionResult& b,
                   double tolerance) {
  using Kind = ExecutionResult::Kind;
  if (a.kind != b.kind || a.kind == Kind::kError) return false;
  switch (a.kind) {
    case Kind::kScalar:
      return std::fabs(a.scalar - b.scalar) <= tolerance;
    case Kind::kList:
      return normalized_list(a.list) == normalized_list(b.list);
    case Kind::kEmpty:
      return true;
    case Kind::kError:
      return false;
  }
  return false;
}

const ScoredQuery& eg_select(const std::vector<ScoredQuery>& candidates,
                             const Table& table) {
  if (candidates.empty()) throw Error("input", "no candidates to select from");
  for (const auto& c : candidates) {
    if (execute(c.query, table).usable()) return c;
  }
  return candidates.front();
}

nlohmann::json result_to_json(const ExecutionResult& result) {
  using Kind = ExecutionResult::Kind;
  nlohmann::json j;
  switch (result.kind) {
    case Kind::kScalar:
      j = {{"kind", "scalar"}, {"value", result.scalar}};
      break;
    case Kind::kList: {
      nlohmann::json values = nlohmann::json::array();
      for (const auto& c : result.list) {
        if (const auto* s = std::get_if<std::string>(&c)) {
          values.push_back(*s);
        } else {
          values.push_back(std::get<double>(c));
        }
      }
      j = {{"kind", "list"}, {"value", values}};
      break;
    }
    case Kind::kError:
      j = {{"kind", "error"}, {"error", result.error}};
      break;
    case Kind::kEmpty:
      j = {{"kind", "empty"}};
      break;
  }
  return j;
}

}  // namespace sqlex
