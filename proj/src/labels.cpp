#include "sqlex/labels.hpp"

#include "sqlex/types.hpp"

namespace sqlex {

LabelSet::LabelSet(std::vector<std::string> functional_types)
    : types_(std::move(functional_types)) {
  names_.push_back("O");
  for (const auto& t : types_) {
    names_.push_back("B-" + t);
    names_.push_back("I-" + t);
  }
}

const LabelSet& LabelSet::roles() {
  static const LabelSet set({"S", "C", "V", "AGG0", "AGG1", "AGG2", "AGG3",
                             "AGG4", "AGG5", "OP0", "OP1", "OP2"});
  return set;
}

const LabelSet& LabelSet::spans() {
  static const LabelSet set({"Sel", "Cond"});
  return set;
}

int LabelSet::id(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  throw Error("label", "unknown label '" + std::string(name) + "'");
}

int LabelSet::type_index(std::string_view type) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i] == type) return static_cast<int>(i);
  }
  throw Error("label", "unknown label type '" + std::string(type) + "'");
}

bool LabelSet::allowed(int prev, int next) {
  if (!is_inside(next)) return true;
  if (prev < 0 || prev == kOutside) return false;
  return type_of(prev) == type_of(next);
}

LabelSeq LabelSet::ids(const std::vector<std::string>& names) const {
  LabelSeq out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(id(n));
  return out;
}

std::vector<std::string> LabelSet::to_names(const LabelSeq& labels) const {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(name(l));
  return out;
}

bool is_bio_valid(const LabelSeq& labels) {
  int prev = -1;
  for (int l : labels) {
    if (l < 0 || !LabelSet::allowed(prev, l)) return false;
    prev = l;
  }
  return true;
}

std::vector<LabelRun> label_runs(const LabelSeq& labels) {
  std::vector<LabelRun> runs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l == kOutside) continue;
    if (LabelSet::is_inside(l) && !runs.empty() && runs.back().end == i &&
        runs.back().type == LabelSet::type_of(l)) {
      runs.back().end = i + 1;
      continue;
    }
    // A B, or an orphan I which is treated as a fresh run.
    runs.push_back({LabelSet::type_of(l), i, i + 1});
  }
  return runs;
}

}  // namespace sqlex
