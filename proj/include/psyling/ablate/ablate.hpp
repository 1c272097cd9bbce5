#pragma once

// Feature-group ablation in the SP-LIME style. Every one of the 2^8 group
// masks is evaluated (no sampling), each local surrogate is a kernel-weighted
// linear fit on the mask bits, and global importance is I_j = sqrt(Σ_i |W_ij|).

#include <bitset>
#include <functional>

#include "psyling/featx/catalog.hpp"
#include "psyling/models/train.hpp"

namespace psyling::ablate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kGroups = featx::kNumGroups;
inline constexpr std::size_t kNumMasks = std::size_t{1} << kGroups;
inline constexpr double kRidge = 1e-10;  // slopes only

/// Bit g set means group g is present.
using GroupMask = std::bitset<kGroups>;

inline GroupMask full_mask() { return GroupMask().set(); }
inline GroupMask mask_at(std::size_t code) { return GroupMask(code); }

/// Zeroes the columns of absent groups. Input must already be standardized,
/// so zero means "at the training mean".
inline void apply_mask(Eigen::Ref<Matrix> standardized, const GroupMask& z,
                       const featx::FeatureCatalog& catalog = featx::FeatureCatalog::standard()) {
  if (static_cast<std::size_t>(standardized.cols()) != catalog.size())
    throw DimMismatch("feature width " + std::to_string(standardized.cols()) + " vs catalog " + std::to_string(catalog.size()));
  for (std::size_t g = 0; g < kGroups; ++g) {
    if (z.test(g)) continue;
    auto [first, last] = catalog.group_slice(featx::group_at(g));
    standardized.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(last - first)).setZero();
  }
}

inline featx::FeatureSequence apply_mask(featx::FeatureSequence standardized, const GroupMask& z,
                                         const featx::FeatureCatalog& catalog = featx::FeatureCatalog::standard()) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      standardized.values.data(), static_cast<Eigen::Index>(standardized.n_rows), static_cast<Eigen::Index>(standardized.n_cols));
  Matrix tmp = m;
  apply_mask(tmp, z, catalog);
  m = tmp;
  return standardized;
}

inline double kernel_width(std::size_t d) { return 0.75 * std::sqrt(static_cast<double>(d)); }

/// exp(−D²/σ²) with D the Hamming distance to the all-present mask.
inline double kernel_weight(const GroupMask& z, std::size_t d = kGroups) {
  const double D = static_cast<double>(d - z.count());
  const double s = kernel_width(d);
  return std::exp(-(D * D) / (s * s));
}

struct LocalExplanation {
  std::string sample_id;
  std::vector<double> w;  // one coefficient per group
  double intercept = 0;
  double r2 = 0;          // kernel-weighted
};

/// Fits score ≈ w·z + b over all masks. responses[code] is the score of mask_at(code).
inline LocalExplanation fit_local_linear(std::span<const double> responses, std::string sample_id = {}) {
  if (responses.size() != kNumMasks) throw DimMismatch("need one response per mask");
  Matrix X(kNumMasks, kGroups + 1);
  Vector y(kNumMasks), k(kNumMasks);
  for (std::size_t code = 0; code < kNumMasks; ++code) {
    const GroupMask z = mask_at(code);
    for (std::size_t g = 0; g < kGroups; ++g) X(static_cast<Eigen::Index>(code), static_cast<Eigen::Index>(g)) = z.test(g) ? 1.0 : 0.0;
    X(static_cast<Eigen::Index>(code), kGroups) = 1.0;
    y(static_cast<Eigen::Index>(code)) = responses[code];
    k(static_cast<Eigen::Index>(code)) = kernel_weight(z);
  }
  // Slopes are invariant to shifting y while the intercept is free; shifting by the full-mask
  // response makes a constant model's right-hand side, and so its slopes, exactly zero.
  const double y0 = y(static_cast<Eigen::Index>(kNumMasks - 1));
  Matrix A = X.transpose() * k.asDiagonal() * X;
  A.diagonal().head(kGroups).array() += kRidge;
  Vector beta = A.ldlt().solve(X.transpose() * k.asDiagonal() * (y.array() - y0).matrix());
  beta(kGroups) += y0;
  if (!beta.allFinite()) throw DimMismatch("local fit produced non-finite coefficients");

  const double ybar = k.dot(y) / k.sum();
  const double ss_res = k.dot((y - X * beta).array().square().matrix());
  const double ss_tot = k.dot((y.array() - ybar).square().matrix());
  LocalExplanation e{std::move(sample_id), std::vector<double>(beta.data(), beta.data() + kGroups), beta(kGroups),
                     ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
  return e;
}

/// Scores of all classes for one masked variant of one sample.
using MaskedScorer = std::function<std::vector<double>(const GroupMask&)>;

/// responses(code, c): class-c score under mask_at(code).
inline Matrix mask_responses(const MaskedScorer& scorer) {
  Matrix r;
  for (std::size_t code = 0; code < kNumMasks; ++code) {
    const auto s = scorer(mask_at(code));
    if (code == 0) r.resize(kNumMasks, static_cast<Eigen::Index>(s.size()));
    if (static_cast<Eigen::Index>(s.size()) != r.cols()) throw DimMismatch("scorer width changed between masks");
    for (std::size_t c = 0; c < s.size(); ++c) r(static_cast<Eigen::Index>(code), static_cast<Eigen::Index>(c)) = s[c];
  }
  return r;
}

inline LocalExplanation fit_local_linear(const MaskedScorer& scorer, std::size_t class_index, std::string sample_id = {}) {
  Vector col = mask_responses(scorer).col(static_cast<Eigen::Index>(class_index));
  return fit_local_linear(std::span<const double>(col.data(), kNumMasks), std::move(sample_id));
}

/// Masked scorer for a trained model: standardize with the checkpoint's
/// statistics, zero absent groups, score as a batch of one.
template <class S>
MaskedScorer model_scorer(const models::TrainedModel<S>& tm, const models::Example& x) {
  const auto& spec = tm.model.spec();
  if (!spec.uses(models::InputKind::Features) || !x.features) throw ArchitectureMismatch("ablation needs a feature-consuming model");
  auto base = std::make_shared<models::PostInput>(
      models::make_input(x.features, x.embedding, x.label, tm.standardizer, tm.config.seq_len));
  return [&tm, base](const GroupMask& z) {
    models::PostInput in = *base;
    if (!z.all()) apply_mask(in.features, z);
    const models::PostInput* p = &in;
    auto batch = models::make_batch<S>(tm.model.spec(), std::span(&p, 1), tm.config.seq_len);
    auto prob = neural::sigmoid<S>(tm.model.logits(batch, nullptr));
    std::vector<double> out(static_cast<std::size_t>(prob.cols()));
    for (Eigen::Index c = 0; c < prob.cols(); ++c) out[static_cast<std::size_t>(c)] = static_cast<double>(prob(0, c));
    return out;
  };
}

/// One n × 8 importance matrix per class, rows in sample order.
inline std::vector<Matrix> importance_matrices(std::size_t n_samples, std::size_t n_classes,
                                               const std::function<MaskedScorer(std::size_t)>& scorer_for) {
  std::vector<Matrix> W(n_classes, Matrix::Zero(static_cast<Eigen::Index>(n_samples), kGroups));
  for (std::size_t i = 0; i < n_samples; ++i) {
    Matrix r = mask_responses(scorer_for(i));
    if (static_cast<std::size_t>(r.cols()) != n_classes) throw DimMismatch("scorer class count");
    for (std::size_t c = 0; c < n_classes; ++c) {
      Vector col = r.col(static_cast<Eigen::Index>(c));
      auto e = fit_local_linear(std::span<const double>(col.data(), kNumMasks));
      for (std::size_t g = 0; g < kGroups; ++g) W[c](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = e.w[g];
    }
  }
  return W;
}

struct GlobalImportance {
  std::vector<double> I;
  std::vector<double> percent;  // all zero when every I_j is zero
  std::vector<std::size_t> rank; // 1 = most important; ties by lower group index
};

inline GlobalImportance global_importance(const Matrix& W) {
  if (!W.allFinite()) throw DimMismatch("importance matrix contains non-finite values");
  GlobalImportance gi;
  const auto d = static_cast<std::size_t>(W.cols());
  double total = 0;
  for (std::size_t j = 0; j < d; ++j) {
    gi.I.push_back(std::sqrt(W.col(static_cast<Eigen::Index>(j)).cwiseAbs().sum()));
    total += gi.I.back();
  }
  for (double v : gi.I) gi.percent.push_back(total > 0.0 ? 100.0 * v / total : 0.0);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gi.I[a] > gi.I[b]; });
  gi.rank.assign(d, 0);
  for (std::size_t r = 0; r < d; ++r) gi.rank[order[r]] = r + 1;
  return gi;
}

/// Groups as rows, one entry per class: I, percent, rank.
inline nlohmann::ordered_json importance_report(const std::string& model, const ClassSet& classes,
                                                const std::vector<Matrix>& W) {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["samples"] = W.empty() ? 0 : W.front().rows();
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (MhcLabel l : kReportOrder) {
    auto idx = classes.index_of(l);
    if (!idx) continue;
    const auto gi = global_importance(W.at(*idx));
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < kGroups; ++g)
      groups.push_back({{"group", std::string(featx::group_name(featx::group_at(g)))},
                        {"I", gi.I[g]},
                        {"percent", gi.percent[g]},
                        {"rank", gi.rank[g]}});
    per_class[std::string(label_name(l))] = groups;
  }
  j["per_class"] = per_class;
  return j;
}

}  // namespace psyling::ablate
