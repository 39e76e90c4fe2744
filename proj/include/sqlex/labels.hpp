// BIO label inventories for mention roles and relation spans.
//
// Every label set is laid out as O, B-t0, I-t0, B-t1, I-t1, ... so that the
// id of O is 0 and label-set order is the order of the functional types.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sqlex {

using LabelSeq = std::vector<int>;

inline constexpr int kOutside = 0;

class LabelSet {
 public:
  explicit LabelSet(std::vector<std::string> functional_types);

  /// Role labels: S, C, V, AGG0..AGG5, OP0..OP2.
  static const LabelSet& roles();
  /// Span labels: Sel, Cond.
  static const LabelSet& spans();

  std::size_t size() const { return names_.size(); }
  std::size_t num_types() const { return types_.size(); }
  const std::string& name(int label) const { return names_.at(label); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& types() const { return types_; }

  /// Throws Error("label") for an unknown name.
  int id(std::string_view name) const;
  int begin_label(int type) const { return 1 + 2 * type; }
  int inside_label(int type) const { return 2 + 2 * type; }
  int type_index(std::string_view type) const;

  /// -1 for O.
  static int type_of(int label) { return label == kOutside ? -1 : (label - 1) / 2; }
  static bool is_begin(int label) { return label != kOutside && (label - 1) % 2 == 0; }
  static bool is_inside(int label) { return label != kOutside && (label - 1) % 2 == 1; }

  /// Whether `next` may follow `prev`; prev == -1 denotes sequence start.
  /// I-x is only legal after B-x or I-x.
  static bool allowed(int prev, int next);

  LabelSeq ids(const std::vector<std::string>& names) const;
  std::vector<std::string> to_names(const LabelSeq& labels) const;

 private:
  std::vector<std::string> types_;
  std::vector<std::string> names_;
};

bool is_bio_valid(const LabelSeq& labels);

/// Maximal runs [begin, end) of one functional type: a B followed by its Is.
struct LabelRun {
  int type = -1;
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<LabelRun> label_runs(const LabelSeq& labels);

// Functional type indices of the role label set.
inline constexpr int kRoleSel = 0;
inline constexpr int kRoleCol = 1;
inline constexpr int kRoleVal = 2;
inline constexpr int kRoleAgg0 = 3;   // AGGi = kRoleAgg0 + i
inline constexpr int kRoleOp0 = 9;    // OPi  = kRoleOp0 + i
inline constexpr int kSpanSel = 0;
inline constexpr int kSpanCond = 1;

}  // namespace sqlex
