#include "sqlex/assembler.hpp"

#include <algorithm>

#include "sqlex/corpus.hpp"

namespace sqlex {
namespace {

using nlohmann::json;

// Clause index -1 is the select clause; i >= 0 is the i-th Cond span.
constexpr int kSelectClause = -1;
constexpr int kNoClause = -2;

bool is_select_role(int type) {
  return type == kRoleSel || (type >= kRoleAgg0 && type < kRoleAgg0 + kNumAggs);
}

std::string mention_text(const Example& ex,
                         const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  std::string out;
  for (const auto& [b, e] : ranges) {
    if (!out.empty()) out.push_back(' ');
    out += detokenize_span(ex, b, e);
  }
  return out;
}

std::string_view kind_name(MentionKind k) {
  switch (k) {
    case MentionKind::kSelCol: return "sel_col";
    case MentionKind::kCondCol: return "cond_col";
    case MentionKind::kValue: return "value";
    case MentionKind::kAgg: return "agg";
    case MentionKind::kOp: return "op";
  }
  return "?";
}

json mention_json(const Mention& m) {
  json ranges = json::array();
  for (const auto& [b, e] : m.ranges) ranges.push_back({b, e});
  json j{{"kind", kind_name(m.kind)}, {"ranges", ranges}, {"text", m.text}};
  if (m.kind == MentionKind::kAgg || m.kind == MentionKind::kOp) j["id"] = m.id;
  return j;
}

}  // namespace

PseudoSql assemble(const Example& example, const LabelSeq& roles,
                   const LabelSeq& spans) {
  const std::size_t n = example.tokens.size();
  if (roles.size() != n || spans.size() != n) {
    throw Error("assemble", "label sequences differ in length from tokens");
  }
  if (!is_bio_valid(roles) || !is_bio_valid(spans)) {
    throw Error("assemble", "label sequences are not BIO-valid");
  }

  const auto span_runs = label_runs(spans);
  std::vector<LabelRun> sel_spans, cond_spans;
  for (const auto& r : span_runs) {
    (r.type == kSpanSel ? sel_spans : cond_spans).push_back(r);
  }

  auto inside = [](const LabelRun& span, const LabelRun& run) {
    return run.begin >= span.begin && run.end <= span.end;
  };
  auto gap = [](const LabelRun& span, const LabelRun& run) -> std::size_t {
    if (run.end <= span.begin) return span.begin - run.end;
    if (run.begin >= span.end) return run.begin - span.end;
    return 0;  // partial overlap
  };

  PseudoSql out;
  struct Assigned {
    LabelRun run;
    int clause;
  };
  std::vector<Assigned> assigned;
  for (const auto& run : label_runs(roles)) {
    const bool select_kind = is_select_role(run.type);
    int clause = kNoClause;
    if (select_kind) {
      for (const auto& s : sel_spans) {
        if (inside(s, run)) clause = kSelectClause;
      }
    } else {
      for (std::size_t c = 0; c < cond_spans.size(); ++c) {
        if (inside(cond_spans[c], run)) clause = static_cast<int>(c);
      }
    }
    if (clause == kNoClause) {
      // Attach to the nearest compatible span within kAttachDistance.
      std::size_t best = kAttachDistance + 1;
      if (select_kind) {
        for (const auto& s : sel_spans) {
          if (gap(s, run) < best) {
            best = gap(s, run);
            clause = kSelectClause;
          }
        }
        // Without any Sel span the select mentions form the clause alone.
        if (sel_spans.empty()) clause = kSelectClause;
      } else {
        for (std::size_t c = 0; c < cond_spans.size(); ++c) {
          if (gap(cond_spans[c], run) < best) {
            best = gap(cond_spans[c], run);
            clause = static_cast<int>(c);
          }
        }
      }
    }
    if (clause == kNoClause) {
      ++out.dropped_mentions;
      continue;
    }
    assigned.push_back({run, clause});
  }

  // Select clause.
  Mention select;
  select.kind = MentionKind::kSelCol;
  bool have_agg = false;
  for (const auto& a : assigned) {
    if (a.clause != kSelectClause) continue;
    if (a.run.type == kRoleSel) {
      select.ranges.emplace_back(a.run.begin, a.run.end);
    } else if (!have_agg) {
      out.agg = a.run.type - kRoleAgg0;
      have_agg = true;
    } else if (a.run.type - kRoleAgg0 != out.agg) {
      out.multiple_aggs = true;
    }
  }
  if (!select.ranges.empty()) {
    select.text = mention_text(example, select.ranges);
    out.select = std::move(select);
  } else if (sel_spans.empty()) {
    throw Error("assemble", "no select target");
  }

  // Conditions, in question order.
  for (std::size_t c = 0; c < cond_spans.size(); ++c) {
    PseudoCondition cond;
    Mention col;
    col.kind = MentionKind::kCondCol;
    bool have_op = false;
    bool have_value = false;
    for (const auto& a : assigned) {
      if (a.clause != static_cast<int>(c)) continue;
      if (a.run.type == kRoleCol) {
        col.ranges.emplace_back(a.run.begin, a.run.end);
      } else if (a.run.type == kRoleVal) {
        if (have_value) continue;  // leftmost value wins
        cond.value_mention.kind = MentionKind::kValue;
        cond.value_mention.ranges = {{a.run.begin, a.run.end}};
        cond.value = detokenize_span(example, a.run.begin, a.run.end);
        cond.value_mention.text = cond.value;
        have_value = true;
      } else if (a.run.type >= kRoleOp0 && !have_op) {
        cond.op = a.run.type - kRoleOp0;
        have_op = true;
      }
    }
    if (!have_value) {
      ++out.dropped_conditions;
      continue;
    }
    if (!col.ranges.empty()) {
      col.text = mention_text(example, col.ranges);
      cond.column = std::move(col);
    }
    out.conds.push_back(std::move(cond));
  }
  return out;
}

json pseudo_to_json(const PseudoSql& pseudo) {
  json conds = json::array();
  for (const auto& c : pseudo.conds) {
    conds.push_back({{"column", c.column ? mention_json(*c.column) : json(nullptr)},
                     {"op", c.op},
                     {"value", c.value}});
  }
  return json{{"select", pseudo.select ? mention_json(*pseudo.select) : json(nullptr)},
              {"agg", pseudo.agg},
              {"conds", conds},
              {"dropped_mentions", pseudo.dropped_mentions},
              {"dropped_conditions", pseudo.dropped_conditions},
              {"multiple_aggs", pseudo.multiple_aggs}};
}

}  // namespace sqlex
