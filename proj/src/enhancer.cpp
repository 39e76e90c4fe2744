#include "sqlex/enhancer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "sqlex/types.hpp"

namespace sqlex {
namespace {

bool fires(const AggRule& rule, const std::set<std::string>& trig, int current) {
  if (rule.from_agg && *rule.from_agg != current) return false;
  return trig.count(rule.trigger) > 0;
}

}  // namespace

std::vector<std::string> triggers_of(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(tokens[i]);
    if (i + 1 < tokens.size()) out.push_back(tokens[i] + " " + tokens[i + 1]);
  }
  return out;
}

RuleList mine_rules(const std::vector<AggItem>& items, int min_gain,
                    MiningTrace* trace) {
  std::vector<std::set<std::string>> trig(items.size());
  std::vector<int> current(items.size());
  std::size_t errors = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto t = triggers_of(items[i].tokens);
    trig[i] = std::set<std::string>(t.begin(), t.end());
    current[i] = items[i].predicted;
    errors += current[i] != items[i].gold;
  }
  if (trace) trace->initial_errors = errors;

  RuleList rules;
  while (true) {
    // (from, to, trigger) proposed by erroneous items.
    std::set<std::tuple<int, int, std::string>> candidates;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (current[i] == items[i].gold) continue;
      for (const auto& t : trig[i]) candidates.emplace(current[i], items[i].gold, t);
    }
    if (candidates.empty()) break;

    std::optional<AggRule> best;
    for (const auto& [from, to, t] : candidates) {
      AggRule r;
      r.from_agg = from;
      r.to_agg = to;
      r.trigger = t;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (!fires(r, trig[i], current[i])) continue;
        if (items[i].gold == to) {
          ++r.corrections;
        } else if (items[i].gold == current[i]) {
          ++r.breakages;
        }
      }
      r.gain = r.corrections - r.breakages;
      auto key = [](const AggRule& x) {
        return std::make_tuple(-x.gain, -x.corrections, x.trigger, *x.from_agg, x.to_agg);
      };
      if (!best || key(r) < key(*best)) best = r;
    }
    if (!best || best->gain < min_gain || best->gain <= 0) break;

    for (std::size_t i = 0; i < items.size(); ++i) {
      if (fires(*best, trig[i], current[i])) current[i] = best->to_agg;
    }
    errors -= static_cast<std::size_t>(best->gain);
    rules.push_back(*best);
    if (trace) trace->errors_after_rule.push_back(errors);
  }
  return rules;
}

int apply_rules(const RuleList& rules, const std::vector<std::string>& tokens,
                int predicted) {
  const auto t = triggers_of(tokens);
  const std::set<std::string> trig(t.begin(), t.end());
  int current = predicted;
  for (const auto& r : rules) {
    if (fires(r, trig, current)) current = r.to_agg;
  }
  return current;
}

nlohmann::json rules_to_json(const RuleList& rules) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rules) {
    out.push_back({{"from", r.from_agg ? nlohmann::json(*r.from_agg) : nlohmann::json("*")},
                   {"to", r.to_agg},
                   {"trigger", r.trigger},
                   {"gain", r.gain},
                   {"corrections", r.corrections},
                   {"breakages", r.breakages}});
  }
  return out;
}

RuleList rules_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("parse", "rule list must be a JSON array");
  RuleList rules;
  for (const auto& r : j) {
    AggRule rule;
    const auto& from = r.at("from");
    if (!(from.is_string() && from.get<std::string>() == "*")) {
      rule.from_agg = from.get<int>();
    }
    rule.to_agg = r.at("to").get<int>();
    rule.trigger = r.at("trigger").get<std::string>();
    rule.gain = r.value("gain", 0);
    rule.corrections = r.value("corrections", 0);
    rule.breakages = r.value("breakages", 0);
    if (rule.to_agg < 0 || rule.to_agg >= kNumAggs ||
        (rule.from_agg && (*rule.from_agg < 0 || *rule.from_agg >= kNumAggs))) {
      throw Error("parse", "rule aggregation id out of range");
    }
    if (rule.trigger.empty()) throw Error("parse", "rule with empty trigger");
    rules.push_back(std::move(rule));
  }
  return rules;
}

}  // namespace sqlex
