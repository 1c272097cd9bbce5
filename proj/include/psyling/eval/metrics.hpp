#pragma once

// Classification metrics over class indices 0..C-1 of a ClassSet.
// F1 = 2PR/(P+R); a class with P+R = 0 scores 0. Macro F1 is the unweighted
// mean of the per-class F1 values.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "psyling/error.hpp"
#include "psyling/labels.hpp"

namespace psyling::eval {

/// counts[actual][predicted]
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::vector<std::uint64_t>> counts;

  explicit ConfusionMatrix(std::size_t c = 0) : n_classes(c), counts(c, std::vector<std::uint64_t>(c, 0)) {}

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& r : counts)
      for (auto v : r) t += v;
    return t;
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassScores {
  double precision = 0, recall = 0, f1 = 0;
  std::uint64_t support = 0;
};

struct F1Report {
  std::vector<ClassScores> per_class;
  double macro_f1 = 0;
};

inline ConfusionMatrix confusion(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                                 std::size_t n_classes) {
  if (truth.size() != pred.size())
    throw LengthMismatch(std::to_string(truth.size()) + " true labels, " + std::to_string(pred.size()) + " predicted");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n_classes || pred[i] >= n_classes) throw UnknownLabel("class index outside the class set");
    ++cm.counts[truth[i]][pred[i]];
  }
  return cm;
}

inline ClassScores scores_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  ClassScores s;
  s.support = tp + fn;
  s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

inline F1Report f1_scores(const ConfusionMatrix& cm) {
  F1Report r;
  const std::size_t C = cm.n_classes;
  for (std::size_t c = 0; c < C; ++c) {
    std::uint64_t tp = cm.counts[c][c], fp = 0, fn = 0;
    for (std::size_t k = 0; k < C; ++k) {
      if (k == c) continue;
      fp += cm.counts[k][c];
      fn += cm.counts[c][k];
    }
    r.per_class.push_back(scores_from_counts(tp, fp, fn));
  }
  double sum = 0;
  for (const auto& s : r.per_class) sum += s.f1;
  r.macro_f1 = C == 0 ? 0.0 : sum / static_cast<double>(C);
  return r;
}

inline F1Report f1_scores(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                          std::size_t n_classes) {
  return f1_scores(confusion(truth, pred, n_classes));
}

inline double macro_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred,
                       std::size_t n_classes) {
  return f1_scores(truth, pred, n_classes).macro_f1;
}

/// Row-stochastic view over actual classes; all-zero rows stay zero.
inline std::vector<std::vector<double>> confusion_normalized(const ConfusionMatrix& cm) {
  std::vector<std::vector<double>> out(cm.n_classes, std::vector<double>(cm.n_classes, 0.0));
  for (std::size_t r = 0; r < cm.n_classes; ++r) {
    std::uint64_t row = 0;
    for (auto v : cm.counts[r]) row += v;
    if (row == 0) continue;
    for (std::size_t c = 0; c < cm.n_classes; ++c)
      out[r][c] = static_cast<double>(cm.counts[r][c]) / static_cast<double>(row);
  }
  return out;
}

struct FoldReport {
  std::string model;
  int fold = -1;
  ClassSet classes;
  F1Report f1;
  ConfusionMatrix cm;
};

inline FoldReport make_fold_report(std::string model, int fold, const ClassSet& classes,
                                   const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred) {
  FoldReport r{std::move(model), fold, classes, {}, confusion(truth, pred, classes.size())};
  r.f1 = f1_scores(r.cm);
  return r;
}

inline nlohmann::ordered_json fold_report_json(const FoldReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["fold"] = r.fold;
  j["classes"] = r.classes.names();
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& s = r.f1.per_class[c];
    per.push_back({{"class", std::string(label_name(r.classes.at(c)))},
                   {"precision", s.precision},
                   {"recall", s.recall},
                   {"f1", s.f1},
                   {"support", s.support}});
  }
  j["per_class"] = per;
  j["macro_f1"] = r.f1.macro_f1;
  j["confusion"] = r.cm.counts;
  return j;
}

struct Summary {
  std::string model;
  ClassSet classes;
  std::vector<double> per_class_f1;  // mean over folds
  double macro_f1 = 0;               // mean of per_class_f1
  ConfusionMatrix cm;                // summed over folds
  std::size_t n_folds = 0;
};

inline Summary aggregate_folds(const std::vector<FoldReport>& reports) {
  if (reports.empty()) throw InconsistentClassSets("no fold reports");
  Summary s{reports.front().model, reports.front().classes, {}, 0, ConfusionMatrix(reports.front().classes.size()),
            reports.size()};
  const std::size_t C = s.classes.size();
  s.per_class_f1.assign(C, 0.0);
  for (const auto& r : reports) {
    if (!(r.classes == s.classes) || r.cm.n_classes != C)
      throw InconsistentClassSets("fold " + std::to_string(r.fold) + " of " + r.model);
    for (std::size_t c = 0; c < C; ++c) {
      s.per_class_f1[c] += r.f1.per_class[c].f1;
      for (std::size_t k = 0; k < C; ++k) s.cm.counts[c][k] += r.cm.counts[c][k];
    }
  }
  double sum = 0;
  for (auto& v : s.per_class_f1) {
    v /= static_cast<double>(reports.size());
    sum += v;
  }
  s.macro_f1 = C == 0 ? 0.0 : sum / static_cast<double>(C);
  return s;
}

/// Table-2 row: per-class F1 in percent in the published row order, then
/// "Average". Classes outside the active set are omitted.
inline nlohmann::ordered_json results_row(const Summary& s) {
  nlohmann::ordered_json row = nlohmann::ordered_json::object();
  row["model"] = s.model;
  for (MhcLabel l : kReportOrder)
    if (s.classes.contains(l)) row[std::string(label_name(l))] = 100.0 * s.per_class_f1[*s.classes.index_of(l)];
  row["Average"] = 100.0 * s.macro_f1;
  return row;
}

/// Row-normalized confusion matrix with class names, rows = actual.
inline nlohmann::ordered_json confusion_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["model"] = s.model;
  j["classes"] = s.classes.names();
  j["counts"] = s.cm.counts;
  j["normalized"] = confusion_normalized(s.cm);
  return j;
}

inline nlohmann::ordered_json summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["results"] = results_row(s);
  j["confusion"] = confusion_json(s);
  j["n_folds"] = s.n_folds;
  return j;
}

}  // namespace psyling::eval
