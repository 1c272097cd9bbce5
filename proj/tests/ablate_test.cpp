#include <gtest/gtest.h>

#include "psyling/ablate/ablate.hpp"

namespace psyling::ablate {
namespace {

using featx::FeatureCatalog;
using featx::FeatureGroup;

Matrix random_features(Eigen::Index rows, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, static_cast<Eigen::Index>(featx::kNumFeatures));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -2.0, 2.0) + 0.01;  // never exactly 0
  return m;
}

std::vector<double> responses_of(const std::function<double(const GroupMask&)>& f) {
  std::vector<double> r;
  for (std::size_t code = 0; code < kNumMasks; ++code) r.push_back(f(mask_at(code)));
  return r;
}

TEST(Mask, IdentityAndAnnihilation) {
  Matrix x = random_features(3, 1);
  Matrix a = x;
  apply_mask(a, full_mask());
  EXPECT_EQ(a, x);
  apply_mask(a, GroupMask());
  EXPECT_TRUE((a.array() == 0.0).all());
}

TEST(Mask, ReadabilitySliceOnly) {
  Matrix x = random_features(2, 2);
  apply_mask(x, full_mask().reset(static_cast<std::size_t>(FeatureGroup::Readability)));
  auto [first, last] = FeatureCatalog::standard().group_slice(FeatureGroup::Readability);
  std::size_t zeroed = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const bool zero = (x.col(c).array() == 0.0).all();
    zeroed += zero;
    const bool in_slice = static_cast<std::size_t>(c) >= first && static_cast<std::size_t>(c) < last;
    EXPECT_EQ(zero, in_slice) << c;
    if (in_slice) {
      EXPECT_EQ(FeatureCatalog::standard()[static_cast<std::size_t>(c)].group, FeatureGroup::Readability);
    }
  }
  EXPECT_EQ(zeroed, 14u);
}

TEST(Mask, SequenceOverload) {
  featx::FeatureSequence fs{"p", 2, featx::kNumFeatures, std::vector<double>(2 * featx::kNumFeatures, 1.5)};
  auto out = apply_mask(fs, full_mask().reset(0));
  EXPECT_EQ(out.at(1, 0), 0.0);
  EXPECT_EQ(out.at(1, 19), 1.5);
  EXPECT_EQ(apply_mask(fs, full_mask()), fs);
}

TEST(Kernel, HandValues) {
  EXPECT_EQ(kernel_weight(full_mask()), 1.0);
  EXPECT_NEAR(kernel_weight(full_mask().reset(1).reset(5)), std::exp(-4.0 / 4.5), 1e-12);
  EXPECT_NEAR(kernel_weight(full_mask().reset(1).reset(5)), 0.41111, 1e-5);
  EXPECT_NEAR(kernel_weight(GroupMask()), std::exp(-64.0 / 4.5), 1e-18);
  EXPECT_DOUBLE_EQ(kernel_width(8) * kernel_width(8), 4.5);
}

TEST(LocalFit, ConstantModel) {
  auto e = fit_local_linear(responses_of([](const GroupMask&) { return 0.37; }));
  for (double w : e.w) EXPECT_NEAR(w, 0.0, 1e-9);
  EXPECT_NEAR(e.intercept, 0.37, 1e-9);
}

TEST(LocalFit, ExactRecoveryOfPlantedLinearModel) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(kGroups);
    for (double& v : a) v = uniform(rng, -3.0, 3.0);
    const double b = uniform(rng, -1.0, 1.0);
    auto e = fit_local_linear(responses_of([&](const GroupMask& z) {
      double s = b;
      for (std::size_t g = 0; g < kGroups; ++g) s += z.test(g) ? a[g] : 0.0;
      return s;
    }));
    for (std::size_t g = 0; g < kGroups; ++g) EXPECT_NEAR(e.w[g], a[g], 1e-8);
    EXPECT_NEAR(e.intercept, b, 1e-8);
    EXPECT_NEAR(e.r2, 1.0, 1e-9);
  }
}

TEST(LocalFit, SingleGroupModel) {
  auto e = fit_local_linear(responses_of([](const GroupMask& z) { return z.test(3) ? 0.8 : 0.2; }));
  for (std::size_t g = 0; g < kGroups; ++g) EXPECT_NEAR(e.w[g], g == 3 ? 0.6 : 0.0, 1e-8);
}

TEST(LocalFit, ClosureOverloadPicksClass) {
  MaskedScorer f = [](const GroupMask& z) { return std::vector<double>{0.5, z.test(6) ? 1.0 : 0.0}; };
  EXPECT_NEAR(fit_local_linear(f, 1).w[6], 1.0, 1e-8);
  EXPECT_NEAR(fit_local_linear(f, 0).w[6], 0.0, 1e-8);
}

TEST(Global, HandValuesAndHomogeneity) {
  auto zero = global_importance(Matrix::Zero(5, 8));
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_EQ(zero.I[j], 0.0);
    EXPECT_EQ(zero.percent[j], 0.0);
  }
  Matrix one_col(2, 1);
  one_col << 0.3, -0.4;
  EXPECT_NEAR(global_importance(one_col).I[0], std::sqrt(0.7), 1e-15);
  EXPECT_NEAR(global_importance(one_col).I[0], 0.83666, 1e-5);

  Rng rng(5);
  Matrix W(10, 8);
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = uniform(rng, -1.0, 1.0);
  auto g1 = global_importance(W), g4 = global_importance(4.0 * W);
  double sum = 0;
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_NEAR(g4.I[j], 2.0 * g1.I[j], 1e-12);
    sum += g1.percent[j];
  }
  EXPECT_EQ(g1.rank, g4.rank);
  EXPECT_NEAR(sum, 100.0, 0.01);
}

TEST(Global, RanksAreAPermutationWithIndexTieBreak) {
  Matrix W = Matrix::Zero(1, 8);
  W(0, 2) = 0.5;
  W(0, 6) = 0.5;
  W(0, 1) = 0.1;
  auto gi = global_importance(W);
  EXPECT_EQ(gi.rank, (std::vector<std::size_t>{4, 3, 1, 5, 6, 7, 2, 8}));
}

TEST(Global, StubModels) {
  auto constant = importance_matrices(4, 2, [](std::size_t) {
    return MaskedScorer([](const GroupMask&) { return std::vector<double>{0.3, 0.7}; });
  });
  for (const auto& W : constant) {
    auto gi = global_importance(W);
    EXPECT_EQ(gi.I, std::vector<double>(kGroups, 0.0));
    EXPECT_EQ(gi.percent, std::vector<double>(kGroups, 0.0));
  }
  // Responds only to its own feature group: that group ranks first for every class.
  auto only3 = importance_matrices(5, 3, [](std::size_t i) {
    return MaskedScorer([i](const GroupMask& m) {
      const double x = m.test(3) ? 1.0 + 0.1 * static_cast<double>(i) : 0.0;
      return std::vector<double>{x, -2 * x, 0.5 * x};
    });
  });
  for (const auto& W : only3) {
    auto gi = global_importance(W);
    EXPECT_EQ(gi.rank[3], 1u);
    EXPECT_GT(gi.percent[3], 99.99);  // the square root lifts ridge-sized slopes to ~1e-5
  }
}

struct SmallModel {
  models::TrainedModel<double> tm;
  featx::FeatureSequence fs;

  SmallModel()
      : tm{models::Classifier<double>(models::ArchitectureSpec::psyling(3, 4, 1, 5, 0.0)),
           models::Standardizer::identity(featx::kNumFeatures), models::TrainConfig{}, ClassSet::from_labels({MhcLabel::ADHD, MhcLabel::Anxiety, MhcLabel::Bipolar}), 0, 0, {}} {
    Rng rng(6);
    tm.model.init(rng);
    tm.config.seq_len = 4;
    Matrix x = random_features(3, 7);
    fs = {"p", 3, featx::kNumFeatures, {}};
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) fs.values.push_back(x(r, c));
  }
};

TEST(ModelScorer, IdentityMaskMatchesPrediction) {
  SmallModel m;
  models::Example x{"p", &m.fs, nullptr, 0};
  auto scorer = model_scorer(m.tm, x);
  EXPECT_EQ(scorer(full_mask()), models::predict_proba(m.tm, {x})[0].scores);
  EXPECT_NE(scorer(GroupMask()), scorer(full_mask()));
}

TEST(ModelScorer, ImportanceIsDeterministicAndReportSumsTo100) {
  SmallModel m;
  models::Example x{"p", &m.fs, nullptr, 0};
  auto run = [&] { return importance_matrices(2, 3, [&](std::size_t) { return model_scorer(m.tm, x); }); };
  auto a = run(), b = run();
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(a[c], b[c]);
  auto rep = importance_report("psyling", m.tm.classes, a);
  EXPECT_EQ(rep["per_class"].size(), 3u);
  for (auto& [cls, groups] : rep["per_class"].items()) {
    ASSERT_EQ(groups.size(), 8u);
    double sum = 0;
    for (auto& g : groups) sum += g["percent"].get<double>();
    EXPECT_NEAR(sum, 100.0, 0.01) << cls;
  }
  EXPECT_EQ(rep["per_class"].begin().key(), "Anxiety");  // report order, not code order
}

TEST(ModelScorer, RejectsEmbeddingOnlyModel) {
  models::TrainedModel<double> tm{models::Classifier<double>(models::ArchitectureSpec::baseline("e", 3, 2, 2)),
                                  models::Standardizer::identity(featx::kNumFeatures), {}, ClassSet::from_labels({MhcLabel::ADHD, MhcLabel::PTSD}), 0, 0, {}};
  EXPECT_THROW(model_scorer(tm, models::Example{"p", nullptr, nullptr, std::nullopt}), ArchitectureMismatch);
}

}  // namespace
}  // namespace psyling::ablate
