#include <gtest/gtest.h>

#include <random>

#include "psyling/eval/metrics.hpp"

using namespace psyling;
using namespace psyling::eval;

TEST(F1, PerfectPredictions) {
  std::vector<std::size_t> y = {0, 1, 2, 3, 4, 5, 6, 0};
  auto r = f1_scores(y, y, 7);
  for (const auto& c : r.per_class) EXPECT_EQ(c.f1, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
}

TEST(F1, HandCaseTp3Fp1Fn2) {
  auto s = scores_from_counts(3, 1, 2);
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.6);
  EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-15);
  // same counts produced from labels: class 0 has TP=3, FP=1, FN=2
  std::vector<std::size_t> truth = {0, 0, 0, 0, 0, 1}, pred = {0, 0, 0, 1, 1, 0};
  EXPECT_NEAR(f1_scores(truth, pred, 2).per_class[0].f1, 2.0 / 3.0, 1e-15);
}

TEST(F1, AbsentClassScoresZero) {
  std::vector<std::size_t> y = {0, 1, 0, 1};
  auto r = f1_scores(y, y, 3);
  EXPECT_EQ(r.per_class[2].f1, 0.0);
  EXPECT_DOUBLE_EQ(r.macro_f1, 2.0 / 3.0);
}

TEST(F1, MacroIsExactMeanOfPerClass) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> t(50), p(50);
    for (std::size_t i = 0; i < 50; ++i) {
      t[i] = rng() % 7;
      p[i] = rng() % 7;
    }
    auto r = f1_scores(t, p, 7);
    double s = 0;
    for (const auto& c : r.per_class) s += c.f1;
    EXPECT_EQ(r.macro_f1, s / 7.0);
  }
}

TEST(F1, LengthMismatch) {
  EXPECT_THROW(f1_scores({0, 1}, {0}, 2), LengthMismatch);
}

TEST(F1, PermutationEquivariance) {
  std::vector<std::size_t> t = {0, 1, 2, 2, 1, 0, 2}, p = {0, 2, 2, 1, 1, 0, 0};
  std::vector<std::size_t> perm = {2, 0, 1};
  std::vector<std::size_t> tp, pp;
  for (auto v : t) tp.push_back(perm[v]);
  for (auto v : p) pp.push_back(perm[v]);
  auto a = f1_scores(t, p, 3), b = f1_scores(tp, pp, 3);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(a.per_class[c].f1, b.per_class[perm[c]].f1);
  EXPECT_NEAR(a.macro_f1, b.macro_f1, 1e-15);
}

TEST(Confusion, NormalizedRows) {
  ConfusionMatrix id(3);
  for (int c = 0; c < 3; ++c) id.counts[c][c] = 5;
  auto n = confusion_normalized(id);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(n[r][c], r == c ? 1.0 : 0.0);

  ConfusionMatrix half(3);
  half.counts[0] = {2, 2, 0};
  auto h = confusion_normalized(half);
  EXPECT_EQ(h[0], (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(h[1], (std::vector<double>{0, 0, 0}));

  std::mt19937_64 rng(8);
  ConfusionMatrix rnd(7);
  for (auto& row : rnd.counts)
    for (auto& v : row) v = rng() % 50;
  for (const auto& row : confusion_normalized(rnd)) {
    double s = 0;
    for (double v : row) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Confusion, RowsAreActual) {
  auto cm = confusion({0, 0, 1}, {1, 1, 1}, 2);
  EXPECT_EQ(cm.counts[0][1], 2u);
  EXPECT_EQ(cm.counts[1][1], 1u);
  EXPECT_EQ(cm.total(), 3u);
}

TEST(Aggregate, MeansAndSums) {
  ClassSet cs = ClassSet::from_labels({MhcLabel::ADHD, MhcLabel::Stress});
  std::vector<FoldReport> reps;
  for (int f = 0; f < 5; ++f) reps.push_back(make_fold_report("m", f, cs, {0, 1, 1}, {0, 1, 0}));
  auto s = aggregate_folds(reps);
  EXPECT_DOUBLE_EQ(s.macro_f1, reps[0].f1.macro_f1);
  EXPECT_EQ(s.cm.total(), 15u);
  EXPECT_EQ(s.per_class_f1[0], reps[0].f1.per_class[0].f1);

  std::vector<FoldReport> varied;
  const double f1s[] = {0.2, 0.3, 0.4, 0.5, 0.6};
  for (int f = 0; f < 5; ++f) {
    FoldReport r{"m", f, cs, {}, ConfusionMatrix(2)};
    r.f1.per_class = {ClassScores{0, 0, f1s[f], 0}, ClassScores{0, 0, 1.0, 0}};
    r.cm.counts[0][0] = static_cast<std::uint64_t>(f + 1);
    varied.push_back(r);
  }
  auto v = aggregate_folds(varied);
  EXPECT_NEAR(v.per_class_f1[0], 0.4, 1e-15);
  EXPECT_NEAR(v.macro_f1, 0.7, 1e-15);
  EXPECT_EQ(v.cm.total(), 15u);
}

TEST(Aggregate, InconsistentClassSets) {
  auto a = make_fold_report("m", 0, ClassSet(), {0}, {0});
  auto b = make_fold_report("m", 1, ClassSet::excluding({MhcLabel::PTSD}), {0}, {0});
  EXPECT_THROW(aggregate_folds({a, b}), InconsistentClassSets);
}

TEST(Report, ResultsRowOrderAndPercent) {
  ClassSet cs = ClassSet::excluding({MhcLabel::PTSD});
  std::vector<std::size_t> y = {0, 1, 2, 3, 4, 5};
  auto s = aggregate_folds({make_fold_report("stack", 0, cs, y, y)});
  auto row = results_row(s);
  std::vector<std::string> keys;
  for (auto it = row.begin(); it != row.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"model", "Depression", "Anxiety", "Bipolar", "ADHD", "Stress",
                                             "Control", "Average"}));
  EXPECT_EQ(row["Average"].get<double>(), 100.0);
}
