#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sqlex/aligner.hpp"
#include "sqlex/corpus.hpp"

namespace sqlex {
namespace {

constexpr std::string_view kMagic = "SQLEX-ALIGN";
constexpr int kVersion = 1;

struct Interned {
  std::vector<std::vector<int>> question;
  std::vector<std::vector<int>> sql;  // null word is id 0, prepended
};

}  // namespace

int AlignmentModel::source_id(std::string_view e) const {
  auto it = source_index_.find(std::string(e));
  return it == source_index_.end() ? -1 : it->second;
}

int AlignmentModel::target_id(std::string_view f) const {
  auto it = target_index_.find(std::string(f));
  return it == target_index_.end() ? -1 : it->second;
}

double AlignmentModel::prob_ids(int f, int e) const {
  const Row& row = rows_[e];
  if (f >= 0) {
    if (auto it = row.probs.find(f); it != row.probs.end()) return it->second;
  }
  return row.rest;
}

double AlignmentModel::prob(std::string_view f, std::string_view e) const {
  const int eid = source_id(e);
  if (eid < 0) return 0.0;
  return prob_ids(target_id(f), eid);
}

bool AlignmentModel::has_source(std::string_view e) const {
  return source_id(e) >= 0;
}

double AlignmentModel::row_mass(std::string_view e) const {
  const int eid = source_id(e);
  if (eid < 0) return 0.0;
  const Row& row = rows_[eid];
  const double others =
      static_cast<double>(target_.size()) - static_cast<double>(row.probs.size());
  double mass = row.rest * others;
  for (const auto& [f, p] : row.probs) mass += p;
  return mass;
}

AlignmentModel AlignmentModel::train(const std::vector<ParallelPair>& corpus,
                                     const Options& options) {
  if (corpus.empty()) throw Error("input", "empty alignment corpus");
  if (options.iterations < 0 || options.smoothing < 0.0) {
    throw Error("input", "invalid aligner options");
  }
  AlignmentModel model;
  auto intern = [](std::unordered_map<std::string, int>& index,
                   std::vector<std::string>& vocab, const std::string& w) {
    auto [it, inserted] = index.emplace(w, static_cast<int>(vocab.size()));
    if (inserted) vocab.push_back(w);
    return it->second;
  };
  intern(model.source_index_, model.source_, kNullToken);

  Interned data;
  for (const auto& pair : corpus) {
    std::vector<int> q;
    for (const auto& f : pair.question) {
      q.push_back(intern(model.target_index_, model.target_, f));
    }
    std::vector<int> s{0};
    for (const auto& e : pair.sql) {
      s.push_back(intern(model.source_index_, model.source_, e));
    }
    data.question.push_back(std::move(q));
    data.sql.push_back(std::move(s));
  }

  const double num_targets = static_cast<double>(model.target_.size());
  model.rows_.assign(model.source_.size(), Row{});
  for (auto& row : model.rows_) row.rest = 1.0 / num_targets;

  auto corpus_ll = [&]() {
    double ll = 0.0;
    for (std::size_t k = 0; k < data.question.size(); ++k) {
      const auto& s = data.sql[k];
      for (int f : data.question[k]) {
        double denom = 0.0;
        for (int e : s) denom += model.prob_ids(f, e);
        ll += std::log(denom / static_cast<double>(s.size()));
      }
    }
    return ll;
  };

  model.history_.push_back(corpus_ll());
  for (int iter = 0; iter < options.iterations; ++iter) {
    std::vector<std::unordered_map<int, double>> counts(model.source_.size());
    std::vector<double> totals(model.source_.size(), 0.0);
    for (std::size_t k = 0; k < data.question.size(); ++k) {
      const auto& s = data.sql[k];
      for (int f : data.question[k]) {
        double denom = 0.0;
        for (int e : s) denom += model.prob_ids(f, e);
        if (denom <= 0.0) continue;
        for (int e : s) {
          const double c = model.prob_ids(f, e) / denom;
          counts[e][f] += c;
          totals[e] += c;
        }
      }
    }
    const double alpha = options.smoothing;
    for (std::size_t e = 0; e < model.rows_.size(); ++e) {
      const double denom = totals[e] + alpha * num_targets;
      Row row;
      if (denom <= 0.0) {
        row.rest = 1.0 / num_targets;
      } else {
        row.rest = alpha / denom;
        for (const auto& [f, c] : counts[e]) row.probs[f] = (c + alpha) / denom;
      }
      model.rows_[e] = std::move(row);
    }
    model.history_.push_back(corpus_ll());
  }
  return model;
}

double AlignmentModel::log_likelihood(
    const std::vector<ParallelPair>& corpus) const {
  double ll = 0.0;
  for (const auto& pair : corpus) {
    for (const auto& f : pair.question) {
      double denom = prob(f, kNullToken);
      for (const auto& e : pair.sql) denom += prob(f, e);
      ll += std::log(denom / static_cast<double>(pair.sql.size() + 1));
    }
  }
  return ll;
}

void AlignmentModel::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << kMagic << ' ' << kVersion << '\n';
  out << "targets " << target_.size() << '\n';
  for (const auto& f : target_) out << f << '\n';
  out << "sources " << source_.size() << '\n';
  for (std::size_t e = 0; e < source_.size(); ++e) {
    const Row& row = rows_[e];
    out << source_[e] << '\n';
    // Deterministic output: entries sorted by target id.
    std::map<int, double> sorted(row.probs.begin(), row.probs.end());
    out << row.rest << ' ' << sorted.size();
    for (const auto& [f, p] : sorted) out << ' ' << f << ' ' << p;
    out << '\n';
  }
  out << "history " << history_.size();
  for (double h : history_) out << ' ' << h;
  out << '\n';
  write_file(path, out.str());
}

AlignmentModel AlignmentModel::load(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic) {
    throw Error("format", path.string() + ": not an alignment model");
  }
  if (version != kVersion) {
    throw Error("version", path.string() + ": alignment model version " +
                               std::to_string(version) + ", expected " +
                               std::to_string(kVersion));
  }
  AlignmentModel model;
  std::string key;
  std::size_t n = 0;
  in >> key >> n;
  if (key != "targets") throw Error("format", "expected targets section");
  in.ignore();
  for (std::size_t i = 0; i < n; ++i) {
    std::string w;
    std::getline(in, w);
    model.target_index_.emplace(w, static_cast<int>(model.target_.size()));
    model.target_.push_back(w);
  }
  in >> key >> n;
  if (key != "sources") throw Error("format", "expected sources section");
  in.ignore();
  for (std::size_t i = 0; i < n; ++i) {
    std::string w;
    std::getline(in, w);
    model.source_index_.emplace(w, static_cast<int>(model.source_.size()));
    model.source_.push_back(w);
    Row row;
    std::size_t entries = 0;
    in >> row.rest >> entries;
    for (std::size_t k = 0; k < entries; ++k) {
      int f = 0;
      double p = 0.0;
      in >> f >> p;
      row.probs[f] = p;
    }
    in.ignore();
    model.rows_.push_back(std::move(row));
  }
  in >> key >> n;
  if (key == "history") {
    model.history_.resize(n);
    for (auto& h : model.history_) in >> h;
  }
  if (!in) throw Error("format", path.string() + ": truncated model file");
  return model;
}

}  // namespace sqlex
