// Schema linking: map select/filter mentions (or bare values) to headers and
// expand a pseudo query into scored executable candidates.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlex/assembler.hpp"
#include "sqlex/types.hpp"

namespace sqlex {

enum class SpanKind { kSelect, kFilter };

struct LinkQuery {
  std::string span_text;
  SpanKind span_kind = SpanKind::kSelect;
  std::string question;
  std::string header;
  int header_index = 0;
  ColumnType col_type = ColumnType::kText;
  const Table* table = nullptr;
  /// Condition value for an explicit filter mention. Cell containment and
  /// type compatibility look at the value when present, else at span_text.
  std::optional<std::string> value;
};

struct LinkWeights {
  double dice = 4.0;
  double jaccard = 2.0;
  double exact = 2.0;
  double containment = 5.0;
  double type = 1.0;
  double bias = -3.0;

  LinkWeights scaled(double c) const {
    return {dice * c, jaccard * c, exact * c, containment * c, type * c, bias * c};
  }
};

struct LinkFeatures {
  double dice = 0.0;
  double jaccard = 0.0;
  double exact = 0.0;
  double containment = 0.0;  // filter kind with a table only
  double type = 0.0;         // filter kind only
};

enum class LinkBasis { kNameMatch, kCellContainment, kTypePrior };

struct LinkDecision {
  int header_index = 0;
  double score = 0.0;
  LinkBasis basis = LinkBasis::kNameMatch;
};

LinkFeatures link_features(const LinkQuery& lq);

/// Logistic of the weighted feature sum, in [0, 1].
double score(const LinkQuery& lq, const LinkWeights& weights = {});

/// All headers ranked for one mention: score descending, ties by lower index.
std::vector<LinkDecision> rank_headers(const std::string& span_text,
                                       SpanKind kind,
                                       const std::string& question,
                                       const TableSchema& schema,
                                       const Table* table,
                                       const std::optional<std::string>& value,
                                       const LinkWeights& weights = {});

struct ScoredQuery {
  SqlQuery query;
  double score = 0.0;  // sum of log link scores over slots
};

struct LinkOptions {
  std::size_t per_slot = 4;
  std::size_t max_candidates = 64;
  LinkWeights weights;
};

/// Candidates best first. The first one is the per-slot argmax. Throws
/// Error("link") without a select mention or for an empty schema.
std::vector<ScoredQuery> link(const PseudoSql& pseudo, const TableSchema& schema,
                              const Table* table, const std::string& question = "",
                              const LinkOptions& options = {});

std::string_view link_basis_name(LinkBasis basis);

}  // namespace sqlex
