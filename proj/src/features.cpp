#include "sqlex/features.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "sqlex/corpus.hpp"
#include "sqlex/text.hpp"

namespace sqlex {
namespace {

constexpr std::size_t kMaxNgram = 4;

std::string join_words(const std::vector<std::string>& w) {
  std::string out;
  for (const auto& s : w) {
    if (!out.empty()) out.push_back(' ');
    out += s;
  }
  return out;
}

struct Flags {
  bool hdr_exact = false;
  bool hdr_partial = false;
  bool cell = false;
};

}  // namespace

std::string word_shape(const std::string& word) {
  if (word.empty()) return "empty";
  bool upper = false, lower = false, digit = false, other = false;
  for (unsigned char c : word) {
    if (std::isupper(c)) upper = true;
    else if (std::islower(c) || c >= 0x80) lower = true;
    else if (std::isdigit(c)) digit = true;
    else if (c != '.' && c != ',') other = true;
  }
  if (text::is_punct_token(word)) return "punct";
  if (digit && !upper && !lower && !other) return "dd";
  if (digit && (upper || lower)) return "dx";
  if (other) return "other";
  if (upper && !lower) return "XX";
  if (upper && std::isupper(static_cast<unsigned char>(word[0]))) return "Xx";
  if (upper) return "xX";
  return "xx";
}

std::vector<FeatureVector> extract_features(const Example& example,
                                            const TableSchema& schema,
                                            const Table* table) {
  const auto& toks = example.tokens;
  const std::size_t n = toks.size();
  std::vector<FeatureVector> out(n);

  std::vector<std::string> header_text;
  for (const auto& h : schema.headers) header_text.push_back(join_words(text::words(h)));

  std::unordered_map<std::string, ColumnType> cells;
  if (table) {
    for (const auto& row : table->rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        cells.emplace(text::normalize_value(cell_to_string(row[c])),
                      schema.col_types[c]);
      }
    }
  }

  // Match flags per token, split into "n-gram begins here" and "inside".
  std::vector<Flags> begin_flags(n), inside_flags(n);
  std::vector<std::set<std::string>> cell_types(n);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t e = b + 1; e <= std::min(n, b + kMaxNgram); ++e) {
      if (text::is_punct_token(toks[b].lower) ||
          text::is_punct_token(toks[e - 1].lower)) {
        continue;
      }
      const std::string span = detokenize_span(example, b, e);
      const std::string span_words = join_words(text::words(span));
      if (span_words.empty()) continue;
      Flags f;
      for (const auto& h : header_text) {
        if (span_words == h) {
          f.hdr_exact = true;
        } else if (text::trigram_dice(span_words, h) >= 0.5) {
          f.hdr_partial = true;
        }
      }
      std::optional<ColumnType> cell_type;
      if (!cells.empty()) {
        if (auto it = cells.find(text::normalize_value(span)); it != cells.end()) {
          f.cell = true;
          cell_type = it->second;
        }
      }
      for (std::size_t t = b; t < e; ++t) {
        Flags& dst = t == b ? begin_flags[t] : inside_flags[t];
        dst.hdr_exact |= f.hdr_exact;
        dst.hdr_partial |= f.hdr_partial;
        dst.cell |= f.cell;
        if (cell_type) {
          cell_types[t].insert(*cell_type == ColumnType::kReal ? "real" : "text");
        }
      }
    }
  }

  auto word_at = [&](long i) -> std::string {
    if (i < 0) return "<s>";
    if (i >= static_cast<long>(n)) return "</s>";
    return toks[static_cast<std::size_t>(i)].lower;
  };

  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector& fv = out[i];
    const std::string& w = toks[i].lower;
    fv.push_back("bias");
    fv.push_back("w=" + w);
    fv.push_back("shape=" + word_shape(toks[i].surface));
    fv.push_back("pre3=" + w.substr(0, std::min<std::size_t>(3, w.size())));
    fv.push_back("suf3=" + w.substr(w.size() - std::min<std::size_t>(3, w.size())));
    if (text::parse_number(w)) fv.push_back("isnum");
    const long li = static_cast<long>(i);
    fv.push_back("w-2=" + word_at(li - 2));
    fv.push_back("w-1=" + word_at(li - 1));
    fv.push_back("w+1=" + word_at(li + 1));
    fv.push_back("w+2=" + word_at(li + 2));
    fv.push_back("pos=" + std::to_string(n > 0 ? (10 * i) / n : 0));

    const Flags& bf = begin_flags[i];
    const Flags& inf = inside_flags[i];
    if (bf.hdr_exact) fv.push_back("hdr_exact_B");
    if (inf.hdr_exact) fv.push_back("hdr_exact_I");
    if (bf.hdr_exact || inf.hdr_exact) fv.push_back("hdr_exact");
    if (bf.hdr_partial) fv.push_back("hdr_partial_B");
    if (inf.hdr_partial) fv.push_back("hdr_partial_I");
    if (bf.hdr_partial || inf.hdr_partial) fv.push_back("hdr_partial");
    if (bf.cell) fv.push_back("cell_B");
    if (inf.cell) fv.push_back("cell_I");
    if (bf.cell || inf.cell) fv.push_back("cell");
    for (const auto& ty : cell_types[i]) fv.push_back("cell_type=" + ty);
  }
  return out;
}

}  // namespace sqlex
