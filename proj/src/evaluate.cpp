#include "sqlex/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "sqlex/executor.hpp"
#include "sqlex/text.hpp"

namespace sqlex {
namespace {

std::string canonical_value(const std::string& value, bool numeric_column) {
  if (numeric_column) {
    if (auto v = text::parse_number(value)) return text::format_number(*v);
  }
  std::string out = text::normalize_space(value);
  while (!out.empty() && out.back() == '.') out.pop_back();
  return text::trim(out);
}

template <typename T>
bool same_multiset(std::vector<T> a, std::vector<T> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

CanonicalQuery canonicalize(const SqlQuery& query, const TableSchema* schema) {
  CanonicalQuery c;
  c.sel = query.sel;
  c.agg = query.agg;
  for (const auto& cond : query.conds) {
    bool numeric = true;
    if (schema && cond.column >= 0 &&
        static_cast<std::size_t>(cond.column) < schema->num_columns()) {
      numeric = schema->col_types[cond.column] == ColumnType::kReal;
    }
    c.conds.emplace_back(cond.column, cond.op, canonical_value(cond.value, numeric));
  }
  std::sort(c.conds.begin(), c.conds.end());
  return c;
}

SqlQuery to_query(const CanonicalQuery& canonical) {
  SqlQuery q;
  q.sel = canonical.sel;
  q.agg = canonical.agg;
  for (const auto& [col, op, value] : canonical.conds) q.conds.push_back({col, op, value});
  return q;
}

std::string_view eval_mode_name(EvalMode mode) {
  switch (mode) {
    case EvalMode::kPlain: return "plain";
    case EvalMode::kEg: return "eg";
    case EvalMode::kOracle: return "oracle";
  }
  return "?";
}

EvalReport evaluate(const std::vector<std::optional<SqlQuery>>& predictions,
                    const std::vector<Example>& gold, const TableSet& tables,
                    EvalMode mode) {
  if (predictions.size() != gold.size()) {
    throw Error("input", "prediction and gold lists differ in length (" +
                             std::to_string(predictions.size()) + " vs " +
                             std::to_string(gold.size()) + ")");
  }
  EvalReport r;
  r.mode = mode;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].gold) throw Error("input", "gold example without a query");
    const SqlQuery& g = *gold[i].gold;
    for (auto* c : {&r.lf, &r.ex, &r.s_col, &r.s_agg, &r.w_no, &r.w_col, &r.w_op, &r.w_val}) {
      ++c->total;
    }
    if (!predictions[i]) {
      ++r.missing;
      continue;
    }
    const SqlQuery& p = *predictions[i];
    const Table* table = tables.find(gold[i].table_id);
    const TableSchema* schema = table ? &table->schema : nullptr;

    const CanonicalQuery cp = canonicalize(p, schema);
    const CanonicalQuery cg = canonicalize(g, schema);
    r.lf.correct += cp == cg;
    if (table) {
      r.ex.correct += results_equal(execute(p, *table), execute(g, *table));
    }
    r.s_col.correct += p.sel == g.sel;
    r.s_agg.correct += p.agg == g.agg;
    r.w_no.correct += p.conds.size() == g.conds.size();
    std::vector<int> pc, gc, po, go;
    std::vector<std::string> pv, gv;
    for (const auto& [col, op, v] : cp.conds) {
      pc.push_back(col);
      po.push_back(op);
      pv.push_back(v);
    }
    for (const auto& [col, op, v] : cg.conds) {
      gc.push_back(col);
      go.push_back(op);
      gv.push_back(v);
    }
    r.w_col.correct += same_multiset(pc, gc);
    r.w_op.correct += same_multiset(po, go);
    r.w_val.correct += same_multiset(pv, gv);
  }
  return r;
}

nlohmann::json EvalReport::to_json() const {
  auto c = [](const Counter& x) {
    return nlohmann::json{{"correct", x.correct}, {"total", x.total}, {"accuracy", x.fraction()}};
  };
  return nlohmann::json{{"mode", eval_mode_name(mode)},
                        {"lf", lf.fraction()},
                        {"ex", ex.fraction()},
                        {"slotwise",
                         {{"s_col", s_col.fraction()},
                          {"s_agg", s_agg.fraction()},
                          {"w_no", w_no.fraction()},
                          {"w_col", w_col.fraction()},
                          {"w_op", w_op.fraction()},
                          {"w_val", w_val.fraction()}}},
                        {"counts",
                         {{"lf", c(lf)},
                          {"ex", c(ex)},
                          {"s_col", c(s_col)},
                          {"s_agg", c(s_agg)},
                          {"w_no", c(w_no)},
                          {"w_col", c(w_col)},
                          {"w_op", c(w_op)},
                          {"w_val", c(w_val)}}},
                        {"missing", missing}};
}

std::string EvalReport::to_text() const {
  auto pct = [](const Counter& x) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%6.1f", 100.0 * x.fraction());
    return std::string(buf);
  };
  std::ostringstream out;
  out << "mode: " << eval_mode_name(mode) << "  examples: " << lf.total << "\n";
  out << "    LF     EX\n";
  out << pct(lf) << " " << pct(ex) << "\n";
  out << " S_col  S_agg   W_no  W_col   W_op  W_val\n";
  out << pct(s_col) << " " << pct(s_agg) << " " << pct(w_no) << " " << pct(w_col)
      << " " << pct(w_op) << " " << pct(w_val) << "\n";
  return out.str();
}

}  // namespace sqlex
