// WikiSQL-format ingestion, tokenization and (de)serialization.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sqlex/types.hpp"

namespace sqlex {

using json = nlohmann::json;

/// Rule tokenizer. Splits on whitespace, then peels punctuation characters
/// off both ends of every chunk as single-character tokens. The interior of
/// a chunk is kept whole, so "1,000.5" and "Lillhage's" stay intact. A sign
/// directly followed by a digit stays attached ("-3").
std::vector<Token> tokenize(std::string_view text);

/// Original question text from tokens[start].char_start to
/// tokens[end - 1].char_end. Throws Error("range") on bad indices.
std::string detokenize_span(const Example& example, std::size_t start,
                            std::size_t end);

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<Example> examples;
  std::vector<Rejection> rejected;
};

/// Parses one JSONL record. Throws Error("parse") for structurally broken
/// records and Error("reject") for out-of-range agg/op ids.
Example parse_example(const json& record);

/// Reads a WikiSQL examples file. A line that is not valid JSON or lacks a
/// required field throws Error("parse") naming the line number; records with
/// unknown agg/op ids are collected in `rejected`.
LoadResult load_examples(const std::filesystem::path& path);
LoadResult load_examples_from_string(std::string_view content);

TableSet load_tables(const std::filesystem::path& path);
TableSet load_tables_from_string(std::string_view content);
Table parse_table(const json& record);

json query_to_json(const SqlQuery& query);
SqlQuery query_from_json(const json& sql);

/// {question, table_id, sql}; `sql` is omitted when the example has no gold.
json example_to_json(const Example& example);
json table_to_json(const Table& table);

/// Writes one JSON value per line.
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<json>& records);
std::vector<json> read_jsonl(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sqlex
