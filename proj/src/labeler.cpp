#include "sqlex/labeler.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sqlex/corpus.hpp"

namespace sqlex {

Labeler Labeler::train(const std::vector<LabeledExample>& corpus,
                       const TableSet& tables, const CrfOptions& options,
                       LabelerTrainReport* report) {
  if (corpus.empty()) throw Error("input", "empty labeler training corpus");
  std::vector<std::vector<FeatureVector>> names;
  std::vector<LabelSeq> roles, spans;
  names.reserve(corpus.size());
  for (const auto& le : corpus) {
    const Table* table = tables.find(le.example.table_id);
    if (!table) {
      throw Error("schema", "unknown table id '" + le.example.table_id + "'");
    }
    names.push_back(extract_features(le.example, table->schema, table));
    roles.push_back(le.roles);
    spans.push_back(le.spans);
    for (int l : le.roles) {
      if (l < 0 || static_cast<std::size_t>(l) >= LabelSet::roles().size()) {
        throw Error("label", "role label outside the role label set");
      }
    }
    for (int l : le.spans) {
      if (l < 0 || static_cast<std::size_t>(l) >= LabelSet::spans().size()) {
        throw Error("label", "span label outside the span label set");
      }
    }
  }
  LabelerTrainReport r;
  CrfModel role_model =
      train_crf(LabelSet::roles(), names, roles, options, &r.roles);
  CrfModel span_model =
      train_crf(LabelSet::spans(), names, spans, options, &r.spans);
  if (report) *report = r;
  return Labeler(std::move(role_model), std::move(span_model));
}

Labeler::Prediction Labeler::predict(const Example& example,
                                     const TableSchema& schema,
                                     const Table* table) const {
  const auto names = extract_features(example, schema, table);
  return {roles_.decode(roles_.map_features(names)).labels,
          spans_.decode(spans_.map_features(names)).labels};
}

std::vector<TaggedCandidate> Labeler::nbest(const Example& example,
                                            const TableSchema& schema,
                                            const Table* table,
                                            std::size_t k) const {
  if (k == 0) throw Error("input", "nbest requires k >= 1");
  const auto names = extract_features(example, schema, table);
  const auto role_paths = roles_.nbest(roles_.map_features(names), k);
  const auto span_paths = spans_.nbest(spans_.map_features(names), k);
  std::vector<TaggedCandidate> out;
  out.reserve(role_paths.size() * span_paths.size());
  for (const auto& r : role_paths) {
    for (const auto& s : span_paths) {
      out.push_back({r.labels, s.labels, r.score + s.score});
    }
  }
  // Stable: equal scores keep (role rank, span rank) order.
  std::stable_sort(out.begin(), out.end(),
                   [](const TaggedCandidate& a, const TaggedCandidate& b) {
                     return a.score > b.score;
                   });
  if (out.size() > k * k) out.resize(k * k);
  return out;
}

void Labeler::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, model] :
       {std::pair{"roles.crf", &roles_}, std::pair{"spans.crf", &spans_}}) {
    std::ostringstream out;
    model->save(out);
    write_file(dir / name, out.str());
  }
}

Labeler Labeler::load(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    std::istringstream in(read_file(dir / name));
    try {
      return CrfModel::load(in);
    } catch (const Error& e) {
      throw Error(e.kind(), (dir / name).string() + ": " + e.what());
    }
  };
  return Labeler(read("roles.crf"), read("spans.crf"));
}

}  // namespace sqlex
