// Core domain types shared by every stage of the extraction-linking pipeline.
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sqlex {

/// Base error for everything thrown by the library. `kind` is a short
/// machine-readable tag ("io", "parse", "schema", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

inline constexpr int kNumAggs = 6;
inline constexpr int kNumOps = 3;

enum Agg : int { kAggNone = 0, kAggMax, kAggMin, kAggCount, kAggSum, kAggAvg };
enum Op : int { kOpEq = 0, kOpGt, kOpLt };

/// Lowercase keyword used on the SQL side of the alignment corpus; empty for NONE.
inline constexpr std::array<std::string_view, kNumAggs> kAggKeywords = {
    "", "max", "min", "count", "sum", "avg"};
inline constexpr std::array<std::string_view, kNumAggs> kAggNames = {
    "", "MAX", "MIN", "COUNT", "SUM", "AVG"};
inline constexpr std::array<std::string_view, kNumOps> kOpSymbols = {"=", ">",
                                                                     "<"};

struct Token {
  std::string surface;
  std::string lower;
  std::size_t char_start = 0;
  std::size_t char_end = 0;  // exclusive
};

enum class ColumnType { kText, kReal };

struct TableSchema {
  std::string table_id;
  std::vector<std::string> headers;
  std::vector<ColumnType> col_types;

  std::size_t num_columns() const { return headers.size(); }
};

/// A cell is kept in the form it had in the source file.
using Cell = std::variant<std::string, double>;

struct Table {
  TableSchema schema;
  std::vector<std::vector<Cell>> rows;
};

struct Condition {
  int column = 0;
  int op = kOpEq;
  std::string value;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct SqlQuery {
  int sel = 0;
  int agg = kAggNone;
  std::vector<Condition> conds;

  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

struct Example {
  std::string question;
  std::vector<Token> tokens;
  std::string table_id;
  std::optional<SqlQuery> gold;
};

/// Tables keyed by id. Immutable after load.
class TableSet {
 public:
  void add(Table table);
  const Table& at(const std::string& table_id) const;
  const Table* find(const std::string& table_id) const;
  std::size_t size() const { return tables_.size(); }
  auto begin() const { return tables_.begin(); }
  auto end() const { return tables_.end(); }

 private:
  std::map<std::string, Table> tables_;
};

/// Throws Error("schema") when an index in `query` is out of range for `schema`.
void validate_query(const SqlQuery& query, const TableSchema& schema);

std::string cell_to_string(const Cell& cell);

/// SQL-like rendering, for logs and debug output.
std::string to_sql_string(const SqlQuery& query, const TableSchema& schema);

}  // namespace sqlex
