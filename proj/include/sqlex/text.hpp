// String normalization and similarity measures used by the aligner, the
// feature extractor, the linker and the executor.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqlex::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Lowercase, trim and collapse internal whitespace runs to one space.
std::string normalize_space(std::string_view s);

/// Lowercased alphanumeric words; every other byte is a separator.
/// Bytes >= 0x80 count as word characters so UTF-8 text survives.
std::vector<std::string> words(std::string_view s);

bool is_punct_token(std::string_view s);

/// Parses a number after stripping thousands separators and '%'.
std::optional<double> parse_number(std::string_view s);

/// Shortest round-trip decimal rendering; integers print without a point.
std::string format_number(double value);

/// Canonical form for value comparison: numbers are reformatted, other
/// strings are lowercased, trimmed, whitespace-collapsed, and lose a
/// trailing '.'.
std::string normalize_value(std::string_view s);

/// Dice coefficient over the multiset of character trigrams, where each
/// word from `words()` is padded with one space on both sides.
double trigram_dice(std::string_view a, std::string_view b);

/// Jaccard overlap of the word sets.
double token_jaccard(std::string_view a, std::string_view b);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - lev(a, b) / max(|a|, |b|); 1 for two empty strings.
double edit_similarity(std::string_view a, std::string_view b);

std::size_t common_prefix(std::string_view a, std::string_view b);

/// shared_prefix / min(|a|, |b|) when the shared prefix has at least
/// `min_prefix` characters, else 0.
double stem_similarity(std::string_view a, std::string_view b,
                       std::size_t min_prefix = 4);

}  // namespace sqlex::text
