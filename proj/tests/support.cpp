#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include "sqlex/corpus.hpp"

namespace testing_support {

std::filesystem::path fixture_dir() { return SQLEX_FIXTURE_DIR; }

std::vector<Example> Fixtures::all() const {
  std::vector<Example> out = train;
  out.insert(out.end(), dev.begin(), dev.end());
  return out;
}

const Fixtures& fixtures() {
  static const Fixtures f = [] {
    Fixtures x;
    x.tables = load_tables(fixture_dir() / "tables.jsonl");
    x.train = load_examples(fixture_dir() / "train.jsonl").examples;
    x.dev = load_examples(fixture_dir() / "dev.jsonl").examples;
    return x;
  }();
  return f;
}

Table swim_table() {
  Table t;
  t.schema.table_id = "t1";
  t.schema.headers = {"Lane", "Name", "Nationality", "Split (50m)", "Time"};
  t.schema.col_types = {ColumnType::kReal, ColumnType::kText, ColumnType::kText,
                        ColumnType::kReal, ColumnType::kReal};
  t.rows = {
      {8.0, std::string("Josefin Lillhage"), std::string("Sweden"), 26.10, 54.89},
      {9.0, std::string("Josefin Lillhage"), std::string("Sweden"), 26.50, 55.10},
      {4.0, std::string("Alice Mills"), std::string("Australia"), 25.90, 54.50},
  };
  return t;
}

SqlQuery worked_query() {
  return SqlQuery{3, kAggSum, {{1, kOpEq, "Josefin Lillhage"}, {0, kOpGt, "8"}}};
}

Example make_example(const std::string& question, const std::string& table_id,
                     std::optional<SqlQuery> gold) {
  Example ex;
  ex.question = question;
  ex.tokens = tokenize(question);
  ex.table_id = table_id;
  ex.gold = std::move(gold);
  return ex;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<double> as_number(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '%'; }),
          s.end());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  s = s.substr(i);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  const double d = std::get<double>(c);
  char buf[64];
  if (d == std::floor(d) && std::fabs(d) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", d);
  } else {
    std::snprintf(buf, sizeof(buf), "%.17g", d);
  }
  return buf;
}

std::optional<double> cell_number(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  return as_number(std::get<std::string>(c));
}

std::string norm(const std::string& s) {
  if (auto v = as_number(s)) {
    char buf[64];
    if (*v == std::floor(*v) && std::fabs(*v) < 1e15) {
      std::snprintf(buf, sizeof(buf), "%.0f", *v);
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", *v);
    }
    return buf;
  }
  std::string out;
  bool space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  while (!out.empty() && out.back() == '.') out.pop_back();
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

OracleResult brute_force_execute(const SqlQuery& q, const Table& table) {
  OracleResult r;
  const int ncol = static_cast<int>(table.schema.headers.size());
  bool bad = q.sel < 0 || q.sel >= ncol || q.agg < 0 || q.agg > 5;
  for (const auto& c : q.conds) bad = bad || c.column < 0 || c.column >= ncol || c.op < 0 || c.op > 2;
  if (bad) {
    r.kind = OracleResult::kError;
    return r;
  }
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    bool all = true;
    for (const auto& c : q.conds) {
      const Cell& cell = table.rows[i][c.column];
      const auto a = cell_number(cell);
      const auto b = as_number(c.value);
      bool ok = false;
      if (c.op == 0) {
        ok = (a && b) ? *a == *b : norm(cell_text(cell)) == norm(c.value);
      } else if (a && b) {
        ok = c.op == 1 ? *a > *b : *a < *b;
      }
      all = all && ok;
    }
    if (all) hits.push_back(i);
  }
  if (q.agg == 3) {
    r.kind = OracleResult::kScalar;
    r.scalar = static_cast<double>(hits.size());
    return r;
  }
  if (hits.empty()) return r;
  if (q.agg == 0) {
    r.kind = OracleResult::kList;
    for (auto i : hits) r.list.push_back(norm(cell_text(table.rows[i][q.sel])));
    return r;
  }
  std::vector<double> xs;
  for (auto i : hits) {
    if (auto v = cell_number(table.rows[i][q.sel])) xs.push_back(*v);
  }
  if (xs.empty()) return r;
  r.kind = OracleResult::kScalar;
  double acc = q.agg == 1 ? -INFINITY : q.agg == 2 ? INFINITY : 0.0;
  for (double x : xs) {
    if (q.agg == 1) acc = std::max(acc, x);
    else if (q.agg == 2) acc = std::min(acc, x);
    else acc += x;
  }
  if (q.agg == 5) acc /= static_cast<double>(xs.size());
  r.scalar = acc;
  return r;
}

bool agrees(const ExecutionResult& got, const OracleResult& want, double tol) {
  using K = ExecutionResult::Kind;
  switch (want.kind) {
    case OracleResult::kError: return got.kind == K::kError;
    case OracleResult::kEmpty: return got.kind == K::kEmpty;
    case OracleResult::kScalar:
      return got.kind == K::kScalar && std::fabs(got.scalar - want.scalar) <= tol;
    case OracleResult::kList: {
      if (got.kind != K::kList) return false;
      std::vector<std::string> a;
      for (const auto& c : got.list) a.push_back(norm(cell_text(c)));
      std::vector<std::string> b = want.list;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      return a == b;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kWords = {"Alpha", "beta", "Gamma Ray", "delta", "ALPHA",
                                         "epsilon", "Zeta", "beta ", "12", "7.5",
                                         "n/a", "Omega"};

int uniform(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

Table random_table(std::mt19937& rng) {
  Table t;
  const int ncol = uniform(rng, 1, 5);
  const int nrow = uniform(rng, 0, 8);
  t.schema.table_id = "rand";
  for (int c = 0; c < ncol; ++c) {
    t.schema.headers.push_back("col" + std::to_string(c));
    t.schema.col_types.push_back(uniform(rng, 0, 1) ? ColumnType::kReal : ColumnType::kText);
  }
  for (int r = 0; r < nrow; ++r) {
    std::vector<Cell> row;
    for (int c = 0; c < ncol; ++c) {
      if (t.schema.col_types[c] == ColumnType::kReal) {
        const int roll = uniform(rng, 0, 9);
        if (roll == 0) {
          row.emplace_back(std::string("n/a"));
        } else if (roll == 1) {
          row.emplace_back(std::to_string(uniform(rng, -5, 20)));
        } else {
          row.emplace_back(static_cast<double>(uniform(rng, -20, 40)) / 2.0);
        }
      } else {
        row.emplace_back(kWords[uniform(rng, 0, static_cast<int>(kWords.size()) - 1)]);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

SqlQuery random_query(std::mt19937& rng, const Table& table) {
  const int ncol = static_cast<int>(table.schema.headers.size());
  SqlQuery q;
  q.sel = uniform(rng, 0, ncol - 1);
  q.agg = uniform(rng, 0, 5);
  const int nc = uniform(rng, 0, 3);
  for (int i = 0; i < nc; ++i) {
    Condition c;
    c.column = uniform(rng, 0, ncol - 1);
    c.op = uniform(rng, 0, 2);
    const int roll = uniform(rng, 0, 3);
    if (!table.rows.empty() && roll < 3) {
      const auto& row = table.rows[uniform(rng, 0, static_cast<int>(table.rows.size()) - 1)];
      c.value = cell_text(row[c.column]);
      if (roll == 1) {
        std::transform(c.value.begin(), c.value.end(), c.value.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
      }
    } else {
      c.value = std::to_string(uniform(rng, -10, 20));
    }
    q.conds.push_back(std::move(c));
  }
  return q;
}

SqlQuery random_query_any(std::mt19937& rng, int num_columns) {
  SqlQuery q;
  q.sel = uniform(rng, -1, num_columns);
  q.agg = uniform(rng, 0, 5);
  const int nc = uniform(rng, 0, 3);
  for (int i = 0; i < nc; ++i) {
    q.conds.push_back({uniform(rng, -1, num_columns), uniform(rng, 0, 2),
                       kWords[uniform(rng, 0, static_cast<int>(kWords.size()) - 1)]});
  }
  return q;
}

// ---------------------------------------------------------------------------

LabelSeq pattern_labels(const LabelSet& labels, const std::vector<std::string>& words) {
  LabelSeq out;
  int prev_type = -1;
  for (const auto& w : words) {
    int label = kOutside;
    const char cls = w.at(0);
    if (cls == 'a' || cls == 'b') {
      const int type = cls == 'a' ? 0 : 1;
      label = prev_type == type ? labels.inside_label(type) : labels.begin_label(type);
    } else if (cls == 'x') {
      label = prev_type == 0 ? labels.inside_label(0) : kOutside;
    }
    out.push_back(label);
    prev_type = LabelSet::type_of(label);
  }
  return out;
}

PatternCorpus make_pattern_corpus(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  PatternCorpus pc;
  const char classes[] = {'a', 'b', 'o', 'o', 'x'};
  for (std::size_t i = 0; i < n; ++i) {
    const int len = uniform(rng, 4, 12);
    std::vector<std::string> words;
    for (int t = 0; t < len; ++t) {
      const char cls = classes[uniform(rng, 0, 4)];
      words.push_back(std::string(1, cls) + std::to_string(uniform(rng, 0, 5)));
    }
    pc.gold.push_back(pattern_labels(pc.labels, words));
    pc.words.push_back(std::move(words));
  }
  return pc;
}

std::vector<std::vector<std::string>> pattern_features(const std::vector<std::string>& words) {
  std::vector<std::vector<std::string>> out;
  for (const auto& w : words) out.push_back({"bias", "w=" + w});
  return out;
}

}  // namespace testing_support
