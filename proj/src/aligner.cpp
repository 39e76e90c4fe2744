#include "sqlex/aligner.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sqlex/corpus.hpp"
#include "sqlex/text.hpp"

namespace sqlex {
namespace {

using nlohmann::json;

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& tok : tokenize(s)) {
    if (!text::is_punct_token(tok.lower)) out.push_back(tok.lower);
  }
  return out;
}

bool range_free(const std::vector<bool>& consumed, std::size_t b,
                std::size_t e) {
  for (std::size_t i = b; i < e; ++i) {
    if (consumed[i]) return false;
  }
  return true;
}

bool punct_edged(const Example& ex, std::size_t b, std::size_t e) {
  return text::is_punct_token(ex.tokens[b].lower) ||
         text::is_punct_token(ex.tokens[e - 1].lower);
}

void claim(AlignmentLink& link, std::vector<bool>& consumed, std::size_t b,
           std::size_t e, Provenance p) {
  link.tokens.clear();
  for (std::size_t i = b; i < e; ++i) {
    link.tokens.push_back(i);
    consumed[i] = true;
  }
  link.provenance = p;
}

struct RangeMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
  double score = -1.0;
};

// Longest free range whose text equals `target` under `same`; leftmost wins.
template <typename Eq>
std::optional<RangeMatch> exact_range(const Example& ex,
                                      const std::vector<bool>& consumed,
                                      std::size_t max_len, Eq&& same) {
  const std::size_t n = ex.tokens.size();
  for (std::size_t len = std::min(max_len, n); len >= 1; --len) {
    for (std::size_t b = 0; b + len <= n; ++b) {
      if (!range_free(consumed, b, b + len)) continue;
      if (same(detokenize_span(ex, b, b + len))) {
        return RangeMatch{b, b + len, 1.0};
      }
    }
  }
  return std::nullopt;
}

// Free range maximizing trigram Dice against `target`, at or above the
// partial threshold. Ties: leftmost, then shorter.
std::optional<RangeMatch> partial_range(const Example& ex,
                                        const std::vector<bool>& consumed,
                                        std::string_view target,
                                        std::size_t max_len) {
  const std::size_t n = ex.tokens.size();
  std::optional<RangeMatch> best;
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t e = b + 1; e <= std::min(n, b + max_len); ++e) {
      if (!range_free(consumed, b, e)) break;
      if (punct_edged(ex, b, e)) continue;
      const double s = text::trigram_dice(detokenize_span(ex, b, e), target);
      if (s < kPartialThreshold) continue;
      if (!best || s > best->score) best = RangeMatch{b, e, s};
    }
  }
  return best;
}

// Tokens a slot may claim: free, within kLocalWindow of its anchor (the
// condition's value, or the select column for the aggregation), and not
// separated from the anchor by tokens of another clause.
std::vector<bool> blocked_for(const Alignment& a, const AlignmentLink& link,
                              std::size_t n) {
  std::vector<bool> blocked = a.consumed(n);
  const AlignmentLink* anchor = nullptr;
  if (link.kind == SlotKind::kCondCol || link.kind == SlotKind::kOp) {
    anchor = a.find(SlotKind::kValue, link.cond);
  } else if (link.kind == SlotKind::kAgg) {
    anchor = a.find(SlotKind::kSelCol);
  }
  if (!anchor || !anchor->aligned() || anchor->tokens.empty()) return blocked;

  std::vector<int> owner(n, -2);
  for (const auto& l : a.links) {
    if (!l.aligned()) continue;
    for (auto t : l.tokens) {
      if (t < n) owner[t] = l.cond;
    }
  }
  const std::size_t lo = anchor->tokens.front();
  const std::size_t hi = anchor->tokens.back();
  for (std::size_t j = 0; j < n; ++j) {
    if (blocked[j] || (j >= lo && j <= hi)) continue;
    const std::size_t from = j < lo ? j + 1 : hi + 1;
    const std::size_t to = j < lo ? lo : j;
    bool ok = to - from < kLocalWindow;
    for (std::size_t t = from; ok && t < to; ++t) {
      ok = owner[t] == -2 || owner[t] == link.cond;
    }
    if (!ok) blocked[j] = true;
  }
  return blocked;
}

// Articles, prepositions, auxiliaries and wh-words. They never ground a
// column, aggregation or operator, only (as part of) a value.
bool is_function_word(std::string_view w) {
  static const std::set<std::string, std::less<>> kWords = {
      "a",    "an",   "and",   "are",  "at",    "be",   "by",   "did",  "do",
      "does", "for",  "from",  "had",  "has",   "have", "in",   "is",   "it",
      "of",   "on",   "or",    "that", "the",   "their", "there", "to", "was",
      "were", "what", "when",  "where", "which", "who",  "whose", "with"};
  return kWords.count(w) > 0;
}

void block_function_words(const Example& example, const AlignmentLink& link,
                          std::vector<bool>& blocked) {
  if (link.kind == SlotKind::kValue) return;
  for (std::size_t j = 0; j < blocked.size(); ++j) {
    if (is_function_word(example.tokens[j].lower)) blocked[j] = true;
  }
}

}  // namespace

std::string_view slot_kind_name(SlotKind kind) {
  switch (kind) {
    case SlotKind::kSelCol: return "sel_col";
    case SlotKind::kAgg: return "agg";
    case SlotKind::kCondCol: return "cond_col";
    case SlotKind::kOp: return "op";
    case SlotKind::kValue: return "value";
  }
  return "?";
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kExact: return "exact";
    case Provenance::kPartial: return "partial";
    case Provenance::kEm: return "em";
    case Provenance::kFallback: return "fallback";
    case Provenance::kUnaligned: return "unaligned";
  }
  return "?";
}

std::vector<bool> Alignment::consumed(std::size_t num_tokens) const {
  std::vector<bool> out(num_tokens, false);
  for (const auto& link : links) {
    for (auto t : link.tokens) {
      if (t < num_tokens) out[t] = true;
    }
  }
  return out;
}

const AlignmentLink* Alignment::find(SlotKind kind, int cond) const {
  for (const auto& link : links) {
    if (link.kind == kind && link.cond == cond) return &link;
  }
  return nullptr;
}

json Alignment::to_json() const {
  json out = json::array();
  for (const auto& link : links) {
    std::string slot(slot_kind_name(link.kind));
    if (link.cond >= 0) slot += ":" + std::to_string(link.cond);
    out.push_back({{"slot", slot},
                   {"tokens", link.tokens},
                   {"provenance", provenance_name(link.provenance)}});
  }
  return out;
}

Alignment make_slots(const Example& example, const TableSchema& schema) {
  if (!example.gold) throw Error("input", "example has no gold query");
  const SqlQuery& q = *example.gold;
  validate_query(q, schema);
  Alignment a;
  a.links.push_back({SlotKind::kSelCol, -1, word_tokens(schema.headers[q.sel]), {}});
  if (q.agg != kAggNone) {
    a.links.push_back(
        {SlotKind::kAgg, -1, {std::string(kAggKeywords[q.agg])}, {}});
  }
  for (std::size_t i = 0; i < q.conds.size(); ++i) {
    const auto& c = q.conds[i];
    const int ci = static_cast<int>(i);
    a.links.push_back(
        {SlotKind::kCondCol, ci, word_tokens(schema.headers[c.column]), {}});
    if (c.op != kOpEq) {
      a.links.push_back({SlotKind::kOp, ci, {std::string(kOpSymbols[c.op])}, {}});
    }
    a.links.push_back({SlotKind::kValue, ci, word_tokens(c.value), {}});
  }
  return a;
}

Alignment string_match_pass(const Example& example, const TableSchema& schema) {
  Alignment a = make_slots(example, schema);
  const SqlQuery& q = *example.gold;
  auto consumed = a.consumed(example.tokens.size());

  for (auto& link : a.links) {
    if (link.kind != SlotKind::kValue) continue;
    const std::string& value = q.conds[link.cond].value;
    const std::string want = text::normalize_space(value);
    const auto want_num = text::parse_number(value);
    if (want.empty()) continue;
    const std::size_t value_len = std::max<std::size_t>(1, tokenize(value).size());
    auto exact = exact_range(example, consumed, value_len + 2,
                             [&](const std::string& span) {
                               if (text::normalize_space(span) == want) return true;
                               if (!want_num) return false;
                               auto got = text::parse_number(span);
                               return got && *got == *want_num;
                             });
    if (exact) {
      claim(link, consumed, exact->begin, exact->end, Provenance::kExact);
      continue;
    }
    if (auto part = partial_range(example, consumed, value, value_len + 2)) {
      claim(link, consumed, part->begin, part->end, Provenance::kPartial);
    }
  }

  for (auto& link : a.links) {
    if (link.kind != SlotKind::kSelCol && link.kind != SlotKind::kCondCol) {
      continue;
    }
    const int col = link.kind == SlotKind::kSelCol
                        ? q.sel
                        : q.conds[link.cond].column;
    const std::string& header = schema.headers[col];
    const auto header_words = text::words(header);
    if (header_words.empty()) continue;
    const std::size_t header_len = std::max<std::size_t>(1, tokenize(header).size());
    consumed = blocked_for(a, link, example.tokens.size());
    auto exact = exact_range(example, consumed, header_len + 2,
                             [&](const std::string& span) {
                               return text::words(span) == header_words;
                             });
    if (exact) {
      // Trim punctuation picked up at the edges, e.g. "( 50m )".
      std::size_t b = exact->begin;
      std::size_t e = exact->end;
      while (b + 1 < e && text::is_punct_token(example.tokens[b].lower)) ++b;
      while (e - 1 > b && text::is_punct_token(example.tokens[e - 1].lower)) --e;
      claim(link, consumed, b, e, Provenance::kExact);
      continue;
    }
    if (auto part = partial_range(example, consumed, header, header_words.size() + 2)) {
      claim(link, consumed, part->begin, part->end, Provenance::kPartial);
    }
    consumed = a.consumed(example.tokens.size());
  }
  return a;
}

std::vector<std::string> sql_side_tokens(const SqlQuery& query,
                                         const TableSchema& schema) {
  validate_query(query, schema);
  std::vector<std::string> out;
  if (query.agg != kAggNone) out.emplace_back(kAggKeywords[query.agg]);
  for (auto& w : word_tokens(schema.headers[query.sel])) out.push_back(w);
  for (const auto& c : query.conds) {
    for (auto& w : word_tokens(schema.headers[c.column])) out.push_back(w);
    out.emplace_back(kOpSymbols[c.op]);
    for (auto& w : word_tokens(c.value)) out.push_back(w);
  }
  return out;
}

std::vector<std::string> question_side_tokens(const Example& example) {
  std::vector<std::string> out;
  out.reserve(example.tokens.size());
  for (const auto& t : example.tokens) out.push_back(t.lower);
  return out;
}

ParallelPair make_parallel_pair(const Example& example,
                                const TableSchema& schema) {
  if (!example.gold) throw Error("input", "example has no gold query");
  return {question_side_tokens(example), sql_side_tokens(*example.gold, schema)};
}

Alignment em_align(const AlignmentModel& model, const Example& example,
                   const TableSchema& schema, const Alignment& residual) {
  Alignment a = residual;
  const std::size_t n = example.tokens.size();
  auto consumed = a.consumed(n);
  const auto sql = sql_side_tokens(*example.gold, schema);

  // Viterbi source of each question token within this pair, by word. Words
  // of slots that are already grounded no longer compete.
  std::multiset<std::string> competitors(sql.begin(), sql.end());
  for (const auto& link : a.links) {
    if (!link.aligned()) continue;
    for (const auto& w : link.sql_tokens) {
      if (auto it = competitors.find(w); it != competitors.end()) competitors.erase(it);
    }
  }
  std::vector<double> best_prob(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const std::string& f = example.tokens[j].lower;
    double best = model.prob(f, kNullToken);
    for (const auto& e : competitors) best = std::max(best, model.prob(f, e));
    best_prob[j] = best;
  }
  // Posterior of source e for token j, normalized over the whole pair.
  std::vector<double> pair_mass(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const std::string& f = example.tokens[j].lower;
    double z = model.prob(f, kNullToken);
    for (const auto& e : sql) z += model.prob(f, e);
    pair_mass[j] = z;
  }
  auto posterior = [&](std::size_t j, const std::string& e) {
    return pair_mass[j] > 0 ? model.prob(example.tokens[j].lower, e) / pair_mass[j] : 0.0;
  };
  auto viterbi_to = [&](std::size_t j, const std::string& e) {
    const double p = model.prob(example.tokens[j].lower, e);
    return posterior(j, e) >= kPosteriorFloor && p >= best_prob[j];
  };

  auto order = [](SlotKind k) {
    switch (k) {
      case SlotKind::kAgg: return 0;
      case SlotKind::kOp: return 1;
      case SlotKind::kSelCol: return 2;
      case SlotKind::kCondCol: return 3;
      case SlotKind::kValue: return 4;
    }
    return 5;
  };
  std::vector<std::size_t> idx(a.links.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return order(a.links[x].kind) < order(a.links[y].kind);
  });

  for (std::size_t li : idx) {
    AlignmentLink& link = a.links[li];
    if (link.aligned()) continue;
    auto blocked = blocked_for(a, link, n);
    block_function_words(example, link, blocked);
    std::set<std::size_t> chosen;
    for (const auto& e : link.sql_tokens) {
      if (!model.has_source(e)) continue;
      std::optional<std::size_t> best;
      double best_p = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (blocked[j] || chosen.count(j) || !viterbi_to(j, e)) continue;
        const double p = posterior(j, e);
        if (!best || p > best_p) {
          best = j;
          best_p = p;
        }
      }
      if (!best) continue;
      chosen.insert(*best);
      if (link.kind == SlotKind::kAgg || link.kind == SlotKind::kOp) {
        for (std::size_t j = *best; j > 0 && !blocked[j - 1] &&
                                    viterbi_to(j - 1, e);
             --j) {
          chosen.insert(j - 1);
        }
        for (std::size_t j = *best + 1; j < n && !blocked[j] && viterbi_to(j, e);
             ++j) {
          chosen.insert(j);
        }
      }
    }
    if (chosen.empty()) continue;
    const std::size_t lo = *chosen.begin();
    const std::size_t hi = *chosen.rbegin() + 1;
    if (link.kind == SlotKind::kValue) {
      if (!range_free(consumed, lo, hi)) continue;
      claim(link, consumed, lo, hi, Provenance::kEm);
      continue;
    }
    link.tokens.assign(chosen.begin(), chosen.end());
    for (auto j : chosen) consumed[j] = true;
    link.provenance = Provenance::kEm;
  }
  return a;
}

Alignment similarity_fallback(const Example& example,
                              const Alignment& residual) {
  Alignment a = residual;
  auto consumed = a.consumed(example.tokens.size());
  for (auto& link : a.links) {
    if (link.aligned()) continue;
    if (link.kind == SlotKind::kValue || link.kind == SlotKind::kOp) continue;
    auto blocked = blocked_for(a, link, example.tokens.size());
    block_function_words(example, link, blocked);
    std::optional<std::size_t> best;
    double best_sim = -1.0;
    for (std::size_t j = 0; j < example.tokens.size(); ++j) {
      if (blocked[j]) continue;
      const std::string& q = example.tokens[j].lower;
      if (text::is_punct_token(q)) continue;
      for (const auto& s : link.sql_tokens) {
        const double sim =
            std::max(text::edit_similarity(s, q), text::stem_similarity(s, q));
        if (sim > best_sim) {
          best_sim = sim;
          best = j;
        }
      }
    }
    if (best && best_sim >= kFallbackThreshold) {
      claim(link, consumed, *best, *best + 1, Provenance::kFallback);
    }
  }
  return a;
}

LabelOutcome generate_labels(const Example& example,
                             const Alignment& alignment) {
  const auto& roles_set = LabelSet::roles();
  const auto& spans_set = LabelSet::spans();
  const std::size_t n = example.tokens.size();
  if (!example.gold) return {std::nullopt, "no_gold"};
  const SqlQuery& q = *example.gold;

  std::vector<int> role_type(n, -1);
  std::vector<int> owner(n, -2);  // -1 select clause, i condition i
  for (const auto& link : alignment.links) {
    if (link.kind == SlotKind::kValue && !link.aligned()) {
      return {std::nullopt, "unaligned_value"};
    }
    if (!link.aligned()) continue;
    int type = -1;
    switch (link.kind) {
      case SlotKind::kSelCol: type = kRoleSel; break;
      case SlotKind::kCondCol: type = kRoleCol; break;
      case SlotKind::kValue: type = kRoleVal; break;
      case SlotKind::kAgg: type = kRoleAgg0 + q.agg; break;
      case SlotKind::kOp: type = kRoleOp0 + q.conds[link.cond].op; break;
    }
    for (auto t : link.tokens) {
      if (t >= n) return {std::nullopt, "token_out_of_range"};
      if (role_type[t] != -1) return {std::nullopt, "token_reused"};
      role_type[t] = type;
      owner[t] = link.cond;
    }
  }

  LabeledExample out;
  out.example = example;
  out.roles.assign(n, kOutside);
  for (std::size_t i = 0; i < n; ++i) {
    if (role_type[i] < 0) continue;
    const bool continues =
        i > 0 && role_type[i - 1] == role_type[i] && owner[i - 1] == owner[i];
    out.roles[i] = continues ? roles_set.inside_label(role_type[i])
                             : roles_set.begin_label(role_type[i]);
  }

  // Minimal covering interval per clause.
  struct Interval {
    std::size_t lo = SIZE_MAX;
    std::size_t hi = 0;
    bool empty() const { return lo == SIZE_MAX; }
  };
  Interval sel;
  std::vector<Interval> conds(q.conds.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (role_type[i] < 0) continue;
    Interval& iv = owner[i] == -1 ? sel : conds[owner[i]];
    iv.lo = std::min(iv.lo, i);
    iv.hi = std::max(iv.hi, i + 1);
  }

  std::vector<int> span_owner(n, -2);
  out.spans.assign(n, kOutside);
  auto paint = [&](const Interval& iv, int who, int type) -> bool {
    for (std::size_t i = iv.lo; i < iv.hi; ++i) {
      if (span_owner[i] != -2) return false;
      span_owner[i] = who;
      out.spans[i] = i == iv.lo ? spans_set.begin_label(type)
                                : spans_set.inside_label(type);
    }
    return true;
  };
  for (std::size_t c = 0; c < conds.size(); ++c) {
    if (conds[c].empty()) continue;
    if (!paint(conds[c], static_cast<int>(c), kSpanCond)) {
      return {std::nullopt, "overlapping_cond_spans"};
    }
  }
  if (!sel.empty() && !paint(sel, -1, kSpanSel)) {
    return {std::nullopt, "overlapping_sel_span"};
  }
  return {std::move(out), ""};
}

AnnotationRecord annotate_example(const AlignmentModel& model,
                                  const Example& example,
                                  const TableSchema& schema) {
  AnnotationRecord rec;
  rec.example = example;
  Alignment a = string_match_pass(example, schema);
  a = em_align(model, example, schema, a);
  a = similarity_fallback(example, a);
  rec.outcome = generate_labels(example, a);
  rec.alignment = std::move(a);
  return rec;
}

Annotation annotate_corpus(const AlignmentModel& model,
                           const std::vector<Example>& examples,
                           const TableSet& tables) {
  Annotation out;
  out.records.reserve(examples.size());
  for (const auto& ex : examples) {
    const Table* table = tables.find(ex.table_id);
    AnnotationRecord rec;
    if (!ex.gold) {
      rec.example = ex;
      rec.outcome.drop_reason = "no_gold";
    } else if (!table) {
      rec.example = ex;
      rec.outcome.drop_reason = "unknown_table";
    } else {
      rec = annotate_example(model, ex, table->schema);
    }
    ++out.report.total;
    if (rec.outcome.labeled) {
      ++out.report.annotated;
    } else {
      ++out.report.dropped;
      ++out.report.drop_reasons[rec.outcome.drop_reason];
    }
    for (const auto& link : rec.alignment.links) {
      ++out.report.provenance[std::string(slot_kind_name(link.kind))]
                             [std::string(provenance_name(link.provenance))];
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

AlignmentModel train_em_aligner(const std::vector<Example>& corpus,
                                const TableSet& tables,
                                const AlignmentModel::Options& options) {
  std::vector<ParallelPair> pairs;
  for (const auto& ex : corpus) {
    const Table* table = tables.find(ex.table_id);
    if (!ex.gold || !table) continue;
    pairs.push_back(make_parallel_pair(ex, table->schema));
  }
  return AlignmentModel::train(pairs, options);
}

json AnnotationReport::to_json() const {
  return json{{"total", total},
              {"annotated", annotated},
              {"dropped", dropped},
              {"provenance", provenance},
              {"drop_reasons", drop_reasons}};
}

std::string AnnotationReport::to_text() const {
  std::ostringstream out;
  out << "examples   " << total << "\n";
  out << "annotated  " << annotated << "\n";
  out << "dropped    " << dropped << "\n";
  for (const auto& [reason, count] : drop_reasons) {
    out << "  " << reason << ": " << count << "\n";
  }
  out << "provenance\n";
  for (const auto& [slot, counts] : provenance) {
    out << "  " << slot << ":";
    for (const auto& [p, c] : counts) out << " " << p << "=" << c;
    out << "\n";
  }
  return out.str();
}

json annotation_to_json(const AnnotationRecord& record) {
  json j = example_to_json(record.example);
  const bool dropped = !record.outcome.labeled;
  j["dropped"] = dropped;
  if (dropped) {
    j["roles"] = json::array();
    j["spans"] = json::array();
    j["drop_reason"] = record.outcome.drop_reason;
  } else {
    j["roles"] = LabelSet::roles().to_names(record.outcome.labeled->roles);
    j["spans"] = LabelSet::spans().to_names(record.outcome.labeled->spans);
  }
  j["provenance"] = record.alignment.to_json();
  return j;
}

std::optional<LabeledExample> labeled_from_json(const json& record) {
  if (record.value("dropped", false)) return std::nullopt;
  LabeledExample le;
  le.example = parse_example(record);
  le.roles = LabelSet::roles().ids(
      record.at("roles").get<std::vector<std::string>>());
  le.spans = LabelSet::spans().ids(
      record.at("spans").get<std::vector<std::string>>());
  if (le.roles.size() != le.example.tokens.size() ||
      le.spans.size() != le.example.tokens.size()) {
    throw Error("parse", "annotation label count differs from token count");
  }
  if (!is_bio_valid(le.roles) || !is_bio_valid(le.spans)) {
    throw Error("label", "annotation labels are not BIO-valid");
  }
  return le;
}

}  // namespace sqlex
