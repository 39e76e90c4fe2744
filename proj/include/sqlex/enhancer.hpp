// Transformation-based correction of aggregation predictions: an ordered
// list of rules "change AGG from x to y when the question contains w".
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sqlex {

struct AggRule {
  std::optional<int> from_agg;  // nullopt matches any prediction
  int to_agg = 0;
  std::string trigger;  // lowercase unigram, or bigram joined by one space
  int gain = 0;         // net gain recorded when the rule was mined
  int corrections = 0;
  int breakages = 0;

  friend bool operator==(const AggRule&, const AggRule&) = default;
};

using RuleList = std::vector<AggRule>;

struct AggItem {
  std::vector<std::string> tokens;  // lowercase question tokens
  int predicted = 0;
  int gold = 0;
};

struct MiningTrace {
  std::size_t initial_errors = 0;
  std::vector<std::size_t> errors_after_rule;  // one entry per mined rule
};

/// Unigram and bigram triggers present in a token sequence.
std::vector<std::string> triggers_of(const std::vector<std::string>& tokens);

/// Greedy mining. Candidates are (current prediction, gold, trigger) of the
/// erroneous items. Each round picks the rule with the largest
/// corrections - breakages over the current predictions (ties: more
/// corrections, then the lexicographically smaller trigger, then smaller
/// from/to ids), applies it, and stops once the best gain is below
/// `min_gain`.
RuleList mine_rules(const std::vector<AggItem>& items, int min_gain = 2,
                    MiningTrace* trace = nullptr);

/// Rules fire in order; each sees the output of the previous ones.
int apply_rules(const RuleList& rules, const std::vector<std::string>& tokens,
                int predicted);

nlohmann::json rules_to_json(const RuleList& rules);
RuleList rules_from_json(const nlohmann::json& j);

}  // namespace sqlex
