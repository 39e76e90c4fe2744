#include "sqlex/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace sqlex::text {
namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::map<std::string, int> padded_trigrams(std::string_view s) {
  std::map<std::string, int> grams;
  for (const auto& w : words(s)) {
    const std::string padded = " " + w + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      ++grams[padded.substr(i, 3)];
    }
  }
  return grams;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_space(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (is_word_byte(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_punct_token(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::ispunct(c) != 0;
  });
}

std::optional<double> parse_number(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : trim(s)) {
    if (c == ',' || c == '%') continue;
    cleaned.push_back(c);
  }
  if (cleaned.empty()) return std::nullopt;
  // from_chars rejects a leading '+', strtod-style inputs are otherwise fine.
  std::size_t offset = cleaned[0] == '+' ? 1 : 0;
  double value = 0.0;
  const char* first = cleaned.data() + offset;
  const char* last = cleaned.data() + cleaned.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  if (std::nearbyint(value) == value && std::fabs(value) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", value);
    return buf;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string normalize_value(std::string_view s) {
  if (auto number = parse_number(s)) return format_number(*number);
  std::string out = normalize_space(s);
  while (!out.empty() && out.back() == '.') out.pop_back();
  return trim(out);
}

double trigram_dice(std::string_view a, std::string_view b) {
  const auto ga = padded_trigrams(a);
  const auto gb = padded_trigrams(b);
  int total = 0;
  for (const auto& [g, n] : ga) total += n;
  for (const auto& [g, n] : gb) total += n;
  if (total == 0) return 0.0;
  int shared = 0;
  for (const auto& [g, n] : ga) {
    if (auto it = gb.find(g); it != gb.end()) shared += std::min(n, it->second);
  }
  return 2.0 * shared / total;
}

double token_jaccard(std::string_view a, std::string_view b) {
  const auto wa = words(a);
  const auto wb = words(b);
  const std::set<std::string> sa(wa.begin(), wa.end());
  const std::set<std::string> sb(wb.begin(), wb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  return static_cast<double>(inter) / (sa.size() + sb.size() - inter);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double edit_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / longest;
}

std::size_t common_prefix(std::string_view a, std::string_view b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return n;
}

double stem_similarity(std::string_view a, std::string_view b,
                       std::size_t min_prefix) {
  const std::size_t shared = common_prefix(a, b);
  if (shared < min_prefix) return 0.0;
  return static_cast<double>(shared) / std::min(a.size(), b.size());
}

}  // namespace sqlex::text
