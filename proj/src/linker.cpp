#include "sqlex/linker.hpp"

#include <algorithm>
#include <cmath>

#include "sqlex/text.hpp"

namespace sqlex {
namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string name_key(std::string_view s) {
  std::string out;
  for (const auto& w : text::words(s)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

struct Contributions {
  double name = 0.0;
  double containment = 0.0;
  double type = 0.0;
  double total = 0.0;
};

Contributions contributions(const LinkFeatures& f, const LinkWeights& w) {
  Contributions c;
  c.name = w.dice * f.dice + w.jaccard * f.jaccard + w.exact * f.exact;
  c.containment = w.containment * f.containment;
  c.type = w.type * f.type;
  c.total = c.name + c.containment + c.type + w.bias;
  return c;
}

}  // namespace

std::string_view link_basis_name(LinkBasis basis) {
  switch (basis) {
    case LinkBasis::kNameMatch: return "name_match";
    case LinkBasis::kCellContainment: return "cell_containment";
    case LinkBasis::kTypePrior: return "type_prior";
  }
  return "?";
}

LinkFeatures link_features(const LinkQuery& lq) {
  LinkFeatures f;
  f.dice = text::trigram_dice(lq.span_text, lq.header);
  f.jaccard = text::token_jaccard(lq.span_text, lq.header);
  const std::string a = name_key(lq.span_text);
  f.exact = !a.empty() && a == name_key(lq.header) ? 1.0 : 0.0;
  if (lq.span_kind != SpanKind::kFilter) return f;

  const std::string& probe = lq.value ? *lq.value : lq.span_text;
  const bool numeric = text::parse_number(probe).has_value();
  f.type = numeric == (lq.col_type == ColumnType::kReal) ? 1.0 : 0.0;
  if (lq.table && !lq.table->rows.empty() && lq.header_index >= 0 &&
      static_cast<std::size_t>(lq.header_index) < lq.table->schema.num_columns()) {
    const std::string want = text::normalize_value(probe);
    std::size_t hits = 0;
    for (const auto& row : lq.table->rows) {
      if (text::normalize_value(cell_to_string(row[lq.header_index])) == want) {
        ++hits;
      }
    }
    f.containment = static_cast<double>(hits) / lq.table->rows.size();
  }
  return f;
}

double score(const LinkQuery& lq, const LinkWeights& weights) {
  return logistic(contributions(link_features(lq), weights).total);
}

std::vector<LinkDecision> rank_headers(const std::string& span_text,
                                       SpanKind kind,
                                       const std::string& question,
                                       const TableSchema& schema,
                                       const Table* table,
                                       const std::optional<std::string>& value,
                                       const LinkWeights& weights) {
  std::vector<LinkDecision> out;
  for (std::size_t i = 0; i < schema.num_columns(); ++i) {
    LinkQuery lq{span_text, kind, question, schema.headers[i],
                 static_cast<int>(i), schema.col_types[i], table, value};
    const auto c = contributions(link_features(lq), weights);
    LinkDecision d;
    d.header_index = static_cast<int>(i);
    d.score = logistic(c.total);
    if (c.containment > c.name && c.containment >= c.type) {
      d.basis = LinkBasis::kCellContainment;
    } else if (c.type > c.name) {
      d.basis = LinkBasis::kTypePrior;
    }
    out.push_back(d);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LinkDecision& a, const LinkDecision& b) {
                     return a.score > b.score;
                   });
  return out;
}

std::vector<ScoredQuery> link(const PseudoSql& pseudo, const TableSchema& schema,
                              const Table* table, const std::string& question,
                              const LinkOptions& options) {
  if (schema.num_columns() == 0) throw Error("link", "empty schema");
  if (!pseudo.select) throw Error("link", "no select mention");
  const std::size_t k = std::max<std::size_t>(1, options.per_slot);

  auto top = [&](std::vector<LinkDecision> ranked) {
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
  };

  std::vector<std::vector<LinkDecision>> slots;
  slots.push_back(top(rank_headers(pseudo.select->text, SpanKind::kSelect,
                                   question, schema, table, std::nullopt,
                                   options.weights)));
  for (const auto& c : pseudo.conds) {
    if (c.column) {
      slots.push_back(top(rank_headers(c.column->text, SpanKind::kFilter,
                                       question, schema, table, c.value,
                                       options.weights)));
    } else {
      slots.push_back(top(rank_headers(c.value, SpanKind::kFilter, question,
                                       schema, table, std::nullopt,
                                       options.weights)));
    }
  }

  // Beam over slots. Truncating partial products to the best
  // max_candidates keeps the exact top max_candidates of the full product.
  struct Partial {
    std::vector<int> choice;
    double score;
  };
  std::vector<Partial> beam{{{}, 0.0}};
  for (const auto& slot : slots) {
    std::vector<Partial> next;
    next.reserve(beam.size() * slot.size());
    for (const auto& p : beam) {
      for (const auto& d : slot) {
        Partial q = p;
        q.choice.push_back(d.header_index);
        q.score += std::log(std::max(d.score, 1e-300));
        next.push_back(std::move(q));
      }
    }
    std::stable_sort(next.begin(), next.end(),
                     [](const Partial& a, const Partial& b) { return a.score > b.score; });
    if (next.size() > options.max_candidates) next.resize(options.max_candidates);
    beam = std::move(next);
  }

  std::vector<ScoredQuery> out;
  out.reserve(beam.size());
  for (const auto& p : beam) {
    ScoredQuery sq;
    sq.score = p.score;
    sq.query.sel = p.choice[0];
    sq.query.agg = pseudo.agg;
    for (std::size_t c = 0; c < pseudo.conds.size(); ++c) {
      sq.query.conds.push_back(
          {p.choice[c + 1], pseudo.conds[c].op, pseudo.conds[c].value});
    }
    out.push_back(std::move(sq));
  }
  return out;
}

}  // namespace sqlex
