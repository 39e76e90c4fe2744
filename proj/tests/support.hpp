// Shared helpers for the unit and acceptance test binaries: fixture access,
// independent reference implementations and random instance generators.
#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sqlex/crf.hpp"
#include "sqlex/executor.hpp"
#include "sqlex/types.hpp"

namespace testing_support {

using namespace sqlex;

std::filesystem::path fixture_dir();

struct Fixtures {
  TableSet tables;
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> all() const;
};
const Fixtures& fixtures();

/// Lane, Name, Nationality, Split (50m), Time with three rows:
/// (8, Josefin Lillhage, Sweden, 26.10, 54.89),
/// (9, Josefin Lillhage, Sweden, 26.50, 55.10),
/// (4, Alice Mills, Australia, 25.90, 54.50).
Table swim_table();

/// SUM(Split (50m)) WHERE Name = 'Josefin Lillhage' AND Lane > 8
SqlQuery worked_query();
inline const std::string kWorkedQuestion =
    "What is the total sum of 50m splits for Josefin Lillhage in lanes above 8?";

Example make_example(const std::string& question, const std::string& table_id,
                     std::optional<SqlQuery> gold = std::nullopt);

// ---------------------------------------------------------------------------
// Brute-force executor written from the query semantics alone.

struct OracleResult {
  enum Kind { kScalar, kList, kError, kEmpty } kind = kEmpty;
  double scalar = 0.0;
  std::vector<std::string> list;  // normalized, in row order
};

OracleResult brute_force_execute(const SqlQuery& query, const Table& table);

/// Whether the library result agrees with the oracle (scalar within tol,
/// lists as multisets of normalized strings).
bool agrees(const ExecutionResult& got, const OracleResult& want,
            double tol = 1e-6);

// ---------------------------------------------------------------------------
// Random instances.

/// At most 8 rows and 5 columns, mixed types, occasional non-numeric cells
/// in real columns and numeric strings in text columns.
Table random_table(std::mt19937& rng);
/// A query that is valid for `table` (indices in range).
SqlQuery random_query(std::mt19937& rng, const Table& table);
/// Any query, including out-of-range indices, over `num_columns` columns.
SqlQuery random_query_any(std::mt19937& rng, int num_columns);

// ---------------------------------------------------------------------------
// Pattern grammar for CRF checks. Words come from four classes:
//   a*: type A, b*: type B, o*: outside, x*: continues an A run, else O.
// A and B words start a run (B-) unless the previous token has the same
// type, in which case they continue it (I-). The x class is the transition
// dependency: its label is I-A after an A token and O otherwise.

struct PatternCorpus {
  LabelSet labels{std::vector<std::string>{"A", "B"}};
  std::vector<std::vector<std::string>> words;
  std::vector<LabelSeq> gold;
};

PatternCorpus make_pattern_corpus(std::size_t n, unsigned seed);

/// Gold labels for a word sequence under the grammar (the generator itself).
LabelSeq pattern_labels(const LabelSet& labels, const std::vector<std::string>& words);

/// Feature names per token: bias and the word only, so the transition
/// dependency has to be learned by the transition weights.
std::vector<std::vector<std::string>> pattern_features(
    const std::vector<std::string>& words);

}  // namespace testing_support
