// Token features for the extractor: lexical templates plus matches against
// the table schema and, when available, the table cells.
#pragma once

#include <string>
#include <vector>

#include "sqlex/types.hpp"

namespace sqlex {

/// Feature names for one token.
using FeatureVector = std::vector<std::string>;

/// One FeatureVector per token. Templates:
///   bias; w (lowercase word); shape (Xx, xx, dd, ...); pre3/suf3; isnum;
///   context words at -2, -1, +1, +2; position decile;
///   header exact / partial match of any n-gram (n <= 4) covering the token,
///   split by whether the n-gram begins at the token;
///   cell match of any covering n-gram (only with a table), likewise split,
///   plus the type of the matching column.
std::vector<FeatureVector> extract_features(const Example& example,
                                            const TableSchema& schema,
                                            const Table* table = nullptr);

/// Coarse word shape class: "Xx" (capitalized), "xx", "XX", "xX", "dd"
/// (numeric), "dx" (digits mixed with letters), "punct", "other".
std::string word_shape(const std::string& word);

}  // namespace sqlex
