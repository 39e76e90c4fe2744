#include "sqlex/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "sqlex/text.hpp"

namespace sqlex {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)); }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

void push_token(std::vector<Token>& out, std::string_view text,
                std::size_t begin, std::size_t end) {
  Token tok;
  tok.surface = std::string(text.substr(begin, end - begin));
  tok.lower = text::to_lower(tok.surface);
  tok.char_start = begin;
  tok.char_end = end;
  out.push_back(std::move(tok));
}

std::string cond_value_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return text::format_number(v.get<double>());
  throw Error("parse", "condition value must be a string or number");
}

template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    ++line_no;
    std::string_view line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).size() > 0) fn(line_no, line);
    pos = nl + 1;
  }
}

}  // namespace

void TableSet::add(Table table) {
  auto id = table.schema.table_id;
  tables_.insert_or_assign(std::move(id), std::move(table));
}

const Table& TableSet::at(const std::string& table_id) const {
  if (const Table* t = find(table_id)) return *t;
  throw Error("schema", "unknown table id '" + table_id + "'");
}

const Table* TableSet::find(const std::string& table_id) const {
  auto it = tables_.find(table_id);
  return it == tables_.end() ? nullptr : &it->second;
}

void validate_query(const SqlQuery& query, const TableSchema& schema) {
  const int m = static_cast<int>(schema.num_columns());
  if (query.sel < 0 || query.sel >= m) {
    throw Error("schema", "select column " + std::to_string(query.sel) +
                              " out of range for " + schema.table_id);
  }
  if (query.agg < 0 || query.agg >= kNumAggs) {
    throw Error("schema", "agg id " + std::to_string(query.agg));
  }
  for (const auto& c : query.conds) {
    if (c.column < 0 || c.column >= m) {
      throw Error("schema", "condition column " + std::to_string(c.column) +
                                " out of range for " + schema.table_id);
    }
    if (c.op < 0 || c.op >= kNumOps) {
      throw Error("schema", "op id " + std::to_string(c.op));
    }
  }
}

std::string cell_to_string(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return text::format_number(std::get<double>(cell));
}

std::string to_sql_string(const SqlQuery& query, const TableSchema& schema) {
  auto header = [&](int i) -> std::string {
    if (i >= 0 && static_cast<std::size_t>(i) < schema.num_columns()) {
      return schema.headers[i];
    }
    return "col" + std::to_string(i);
  };
  std::string out = "SELECT ";
  if (query.agg > 0 && query.agg < kNumAggs) {
    out += std::string(kAggNames[query.agg]) + " (" + header(query.sel) + ")";
  } else {
    out += "(" + header(query.sel) + ")";
  }
  out += " FROM " + (schema.table_id.empty() ? "table" : schema.table_id);
  for (std::size_t i = 0; i < query.conds.size(); ++i) {
    const auto& c = query.conds[i];
    out += i == 0 ? " WHERE " : " AND ";
    const std::string_view op =
        c.op >= 0 && c.op < kNumOps ? kOpSymbols[c.op] : "?";
    out += header(c.column) + " " + std::string(op) + " '" + c.value + "'";
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    std::size_t b = i;
    while (i < n && !is_space(text[i])) ++i;
    std::size_t e = i;

    // Leading punctuation, one token per character.
    while (b < e && is_punct(text[b])) {
      const bool sign = (text[b] == '-' || text[b] == '+') && b + 1 < e &&
                        is_digit(text[b + 1]);
      if (sign) break;
      push_token(out, text, b, b + 1);
      ++b;
    }
    std::size_t core_end = e;
    while (core_end > b && is_punct(text[core_end - 1])) --core_end;
    if (core_end > b) push_token(out, text, b, core_end);
    for (std::size_t p = core_end; p < e; ++p) push_token(out, text, p, p + 1);
  }
  return out;
}

std::string detokenize_span(const Example& example, std::size_t start,
                            std::size_t end) {
  if (start >= end || end > example.tokens.size()) {
    throw Error("range", "token span [" + std::to_string(start) + ", " +
                             std::to_string(end) + ") out of range for " +
                             std::to_string(example.tokens.size()) +
                             " tokens");
  }
  const std::size_t b = example.tokens[start].char_start;
  const std::size_t e = example.tokens[end - 1].char_end;
  return example.question.substr(b, e - b);
}

SqlQuery query_from_json(const json& sql) {
  if (!sql.is_object()) throw Error("parse", "sql must be an object");
  for (const char* key : {"sel", "agg", "conds"}) {
    if (!sql.contains(key)) {
      throw Error("parse", std::string("sql is missing '") + key + "'");
    }
  }
  SqlQuery q;
  q.sel = sql.at("sel").get<int>();
  q.agg = sql.at("agg").get<int>();
  if (q.agg < 0 || q.agg >= kNumAggs) {
    throw Error("reject", "unknown agg id " + std::to_string(q.agg));
  }
  if (q.sel < 0) throw Error("reject", "negative select column");
  for (const auto& c : sql.at("conds")) {
    if (!c.is_array() || c.size() != 3) {
      throw Error("parse", "condition must be [col, op, value]");
    }
    Condition cond;
    cond.column = c[0].get<int>();
    cond.op = c[1].get<int>();
    if (cond.op < 0 || cond.op >= kNumOps) {
      throw Error("reject", "unknown op id " + std::to_string(cond.op));
    }
    if (cond.column < 0) throw Error("reject", "negative condition column");
    cond.value = cond_value_string(c[2]);
    q.conds.push_back(std::move(cond));
  }
  return q;
}

json query_to_json(const SqlQuery& query) {
  json conds = json::array();
  for (const auto& c : query.conds) conds.push_back({c.column, c.op, c.value});
  return json{{"sel", query.sel}, {"agg", query.agg}, {"conds", conds}};
}

Example parse_example(const json& record) {
  if (!record.is_object()) throw Error("parse", "record is not an object");
  if (!record.contains("question") || !record["question"].is_string()) {
    throw Error("parse", "missing string field 'question'");
  }
  if (!record.contains("table_id") || !record["table_id"].is_string()) {
    throw Error("parse", "missing string field 'table_id'");
  }
  Example ex;
  ex.question = record["question"].get<std::string>();
  ex.table_id = record["table_id"].get<std::string>();
  ex.tokens = tokenize(ex.question);
  if (record.contains("sql") && !record["sql"].is_null()) {
    ex.gold = query_from_json(record["sql"]);
  }
  return ex;
}

json example_to_json(const Example& example) {
  json j{{"question", example.question}, {"table_id", example.table_id}};
  if (example.gold) j["sql"] = query_to_json(*example.gold);
  return j;
}

LoadResult load_examples_from_string(std::string_view content) {
  LoadResult result;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("parse", "line " + std::to_string(line_no) +
                               ": malformed JSON: " + e.what());
    }
    try {
      result.examples.push_back(parse_example(record));
    } catch (const Error& e) {
      if (e.kind() == "reject") {
        result.rejected.push_back({line_no, e.what()});
      } else {
        throw Error("parse",
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
    } catch (const json::exception& e) {
      throw Error("parse",
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  return result;
}

LoadResult load_examples(const std::filesystem::path& path) {
  return load_examples_from_string(read_file(path));
}

Table parse_table(const json& record) {
  Table t;
  t.schema.table_id = record.at("id").get<std::string>();
  t.schema.headers = record.at("header").get<std::vector<std::string>>();
  const auto types = record.at("types").get<std::vector<std::string>>();
  if (t.schema.headers.empty() || types.size() != t.schema.headers.size()) {
    throw Error("parse", "table " + t.schema.table_id +
                             ": header/types length mismatch or empty");
  }
  for (const auto& ty : types) {
    if (ty == "real") {
      t.schema.col_types.push_back(ColumnType::kReal);
    } else if (ty == "text") {
      t.schema.col_types.push_back(ColumnType::kText);
    } else {
      throw Error("parse", "table " + t.schema.table_id +
                               ": unknown column type '" + ty + "'");
    }
  }
  if (record.contains("rows")) {
    for (const auto& row : record["rows"]) {
      if (row.size() != t.schema.headers.size()) {
        throw Error("parse", "table " + t.schema.table_id +
                                 ": row length differs from header length");
      }
      std::vector<Cell> cells;
      cells.reserve(row.size());
      for (const auto& c : row) {
        if (c.is_number()) {
          cells.emplace_back(c.get<double>());
        } else if (c.is_string()) {
          cells.emplace_back(c.get<std::string>());
        } else if (c.is_null()) {
          cells.emplace_back(std::string());
        } else {
          throw Error("parse", "table " + t.schema.table_id +
                                   ": cell must be string or number");
        }
      }
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

json table_to_json(const Table& table) {
  json types = json::array();
  for (auto ty : table.schema.col_types) {
    types.push_back(ty == ColumnType::kReal ? "real" : "text");
  }
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = json::array();
    for (const auto& c : row) {
      if (const auto* s = std::get_if<std::string>(&c)) {
        r.push_back(*s);
      } else {
        r.push_back(std::get<double>(c));
      }
    }
    rows.push_back(std::move(r));
  }
  return json{{"id", table.schema.table_id},
              {"header", table.schema.headers},
              {"types", types},
              {"rows", rows}};
}

TableSet load_tables_from_string(std::string_view content) {
  TableSet tables;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    try {
      tables.add(parse_table(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error("parse", "tables line " + std::to_string(line_no) + ": " +
                               e.what());
    } catch (const Error& e) {
      throw Error("parse", "tables line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  });
  return tables;
}

TableSet load_tables(const std::filesystem::path& path) {
  return load_tables_from_string(read_file(path));
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> out;
  for_each_line(read_file(path), [&](std::size_t line_no, std::string_view l) {
    try {
      out.push_back(json::parse(l));
    } catch (const json::parse_error& e) {
      throw Error("parse", path.string() + " line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  });
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace sqlex
