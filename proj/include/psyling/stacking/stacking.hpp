#pragma once

// Stacked generalization. Stage 1 yields out-of-fold score vectors from every
// component model; Stage 2 is a multinomial logistic regression over their
// concatenation, and never sees raw features or embeddings.

#include <functional>
#include <map>

#include "psyling/corpus/folds.hpp"
#include "psyling/eval/metrics.hpp"
#include "psyling/models/train.hpp"

namespace psyling::stacking {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct StackingMatrix {
  std::vector<std::string> models;
  std::size_t n_classes = 0;
  std::vector<std::string> post_ids;
  std::vector<std::size_t> labels;
  Matrix values;                        // rows × (models · n_classes)
  std::vector<std::vector<int>> fold;   // [model][row]: fold whose held-out pass produced the block

  std::size_t rows() const { return post_ids.size(); }
  std::size_t cols() const { return models.size() * n_classes; }
  auto block(std::size_t m) const { return values.middleCols(static_cast<Eigen::Index>(m * n_classes), static_cast<Eigen::Index>(n_classes)); }
};

/// predict(model, k) must return predictions for exactly the posts of fold k,
/// from an instance that was not trained on fold k.
using HeldOutPredictor = std::function<std::vector<models::PredictionVector>(std::size_t model, int fold)>;

/// Assembles the out-of-fold matrix. Each post must be covered exactly once per
/// model, and by the fold it is assigned to.
inline StackingMatrix stage1_oof(const std::vector<std::string>& model_ids, std::size_t n_classes,
                                 const std::vector<std::string>& post_ids, const std::vector<std::size_t>& labels,
                                 const FoldAssignment& folds, const HeldOutPredictor& predict) {
  if (labels.size() != post_ids.size() || folds.fold.size() != post_ids.size())
    throw LengthMismatch("posts, labels and fold assignment disagree in length");
  if (!folds.post_ids.empty() && folds.post_ids != post_ids) throw LengthMismatch("fold assignment is for other posts");
  StackingMatrix sm{model_ids, n_classes, post_ids, labels,
                    Matrix::Zero(static_cast<Eigen::Index>(post_ids.size()), static_cast<Eigen::Index>(model_ids.size() * n_classes)),
                    std::vector<std::vector<int>>(model_ids.size(), std::vector<int>(post_ids.size(), -1))};
  std::map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < post_ids.size(); ++r) row_of.emplace(post_ids[r], r);

  for (std::size_t m = 0; m < model_ids.size(); ++m)
    for (int k = 0; k < folds.n_folds; ++k)
      for (const auto& p : predict(m, k)) {
        auto it = row_of.find(p.post_id);
        if (it == row_of.end()) throw IncompleteCoverage("prediction for unknown post " + p.post_id);
        const std::size_t r = it->second;
        if (sm.fold[m][r] != -1) throw IncompleteCoverage(p.post_id + " covered twice by " + model_ids[m]);
        if (folds.fold[r] != k) throw IncompleteCoverage(p.post_id + " predicted by an instance trained on it");
        if (p.scores.size() != n_classes) throw DimMismatch("score vector width for " + p.post_id);
        sm.fold[m][r] = k;
        for (std::size_t c = 0; c < n_classes; ++c)
          sm.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m * n_classes + c)) = p.scores[c];
      }
  for (std::size_t m = 0; m < model_ids.size(); ++m)
    for (std::size_t r = 0; r < post_ids.size(); ++r)
      if (sm.fold[m][r] == -1) throw IncompleteCoverage(post_ids[r] + " has no held-out prediction from " + model_ids[m]);
  return sm;
}

/// Row-wise softmax, max-shifted.
inline Matrix softmax_rows(const Matrix& z) {
  Matrix p = (z.colwise() - z.rowwise().maxCoeff()).array().exp().matrix();
  return p.array().colwise() / p.rowwise().sum().array();
}

struct MetaModel {
  Matrix W;    // D × C
  Vector bias; // C

  Matrix predict_proba(const Matrix& x) const {
    if (x.cols() != W.rows()) throw DimMismatch("meta input has " + std::to_string(x.cols()) + " columns, expected " + std::to_string(W.rows()));
    return softmax_rows((x * W).rowwise() + bias.transpose());
  }
};

struct MetaOptions {
  double lambda = 1e-4;   // L2 on W only; the bias is unpenalized
  double tol = 1e-8;      // on the Euclidean gradient norm
  std::size_t max_iter = 5000;
};

/// Mean cross-entropy + (λ/2)‖W‖², minimized by damped Newton steps with
/// backtracking. The softmax's shift symmetry in the bias leaves the Hessian
/// singular along one direction the gradient never has a component in, so a
/// 1e-10 jitter on the bias block is enough.
inline MetaModel fit_meta(const Matrix& x, const std::vector<std::size_t>& labels, std::size_t n_classes,
                          const MetaOptions& opt = {}) {
  const auto n = x.rows(), D = x.cols(), C = static_cast<Eigen::Index>(n_classes);
  if (n == 0) throw EmptySplit("meta-learner has no rows");
  if (static_cast<std::size_t>(n) != labels.size()) throw LengthMismatch("meta rows vs labels");
  if (!x.allFinite()) throw DimMismatch("stacking matrix contains non-finite values");
  Matrix y = Matrix::Zero(n, C);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (labels[static_cast<std::size_t>(r)] >= n_classes) throw UnknownLabel("meta label out of range");
    y(r, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) = 1.0;
  }
  Matrix xa(n, D + 1);
  xa << x, Vector::Ones(n);
  const Eigen::Index P = (D + 1) * C;  // θ laid out column-major over (D+1) × C
  Matrix theta = Matrix::Zero(D + 1, C);

  auto objective = [&](const Matrix& th) {
    Matrix z = xa * th;
    Vector m = z.rowwise().maxCoeff();
    Vector lse = ((z.colwise() - m).array().exp().rowwise().sum().log()).matrix() + m;
    double ce = (lse.sum() - (z.array() * y.array()).sum()) / static_cast<double>(n);
    return ce + 0.5 * opt.lambda * th.topRows(D).squaredNorm();
  };

  double gnorm = 0;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    Matrix p = softmax_rows(xa * theta);
    Matrix g = xa.transpose() * (p - y) / static_cast<double>(n);
    g.topRows(D) += opt.lambda * theta.topRows(D);
    gnorm = g.norm();
    if (gnorm < opt.tol) return {theta.topRows(D), theta.row(D).transpose()};

    Matrix H = Matrix::Zero(P, P);
    for (Eigen::Index a = 0; a < C; ++a)
      for (Eigen::Index b = a; b < C; ++b) {
        Vector w = p.col(a).cwiseProduct((a == b ? 1.0 : 0.0) * Vector::Ones(n) - p.col(b));
        Matrix blk = xa.transpose() * w.asDiagonal() * xa / static_cast<double>(n);
        H.block(a * (D + 1), b * (D + 1), D + 1, D + 1) = blk;
        if (a != b) H.block(b * (D + 1), a * (D + 1), D + 1, D + 1) = blk.transpose();
      }
    for (Eigen::Index a = 0; a < C; ++a) {
      for (Eigen::Index d = 0; d < D; ++d) H(a * (D + 1) + d, a * (D + 1) + d) += opt.lambda;
      H(a * (D + 1) + D, a * (D + 1) + D) += 1e-10;
    }
    Vector gv = Eigen::Map<const Vector>(g.data(), P);
    Vector step = H.ldlt().solve(gv);
    if (!step.allFinite() || step.dot(gv) <= 0.0) step = gv;  // fall back to steepest descent
    Matrix dir = Eigen::Map<const Matrix>(step.data(), D + 1, C);

    const double f0 = objective(theta);
    double t = 1.0;
    while (t > 1e-12 && objective(theta - t * dir) > f0 - 1e-4 * t * step.dot(gv)) t *= 0.5;
    if (t <= 1e-12) break;
    theta -= t * dir;
  }
  Matrix p = softmax_rows(xa * theta);
  Matrix g = xa.transpose() * (p - y) / static_cast<double>(n);
  g.topRows(D) += opt.lambda * theta.topRows(D);
  gnorm = g.norm();
  if (gnorm < opt.tol) return {theta.topRows(D), theta.row(D).transpose()};
  throw NotConverged("meta-learner gradient norm " + std::to_string(gnorm) + " after " + std::to_string(opt.max_iter) +
                     " iterations");
}

/// Mean over fold instances of one model; all instances must score the same posts in order.
inline std::vector<std::vector<double>> average_instances(const std::vector<std::vector<models::PredictionVector>>& instances) {
  if (instances.empty()) throw MissingCheckpoint("no model instances to average");
  std::vector<std::vector<double>> avg;
  for (const auto& p : instances.front()) avg.push_back(std::vector<double>(p.scores.size(), 0.0));
  for (const auto& inst : instances) {
    if (inst.size() != avg.size()) throw LengthMismatch("fold instances scored different post counts");
    for (std::size_t i = 0; i < inst.size(); ++i) {
      if (inst[i].post_id != instances.front()[i].post_id) throw LengthMismatch("fold instances scored different posts");
      for (std::size_t c = 0; c < avg[i].size(); ++c) avg[i][c] += inst[i].scores[c];
    }
  }
  for (auto& row : avg)
    for (double& v : row) v /= static_cast<double>(instances.size());
  return avg;
}

/// per_model[m][k] = predictions of fold-instance k of component m on the test posts.
inline std::vector<models::PredictionVector> stack_predict(
    const MetaModel& meta, const std::vector<std::vector<std::vector<models::PredictionVector>>>& per_model) {
  if (per_model.empty()) throw MissingCheckpoint("no component models");
  const auto& ref = per_model.front().at(0);
  std::vector<std::vector<std::vector<double>>> avgs;
  for (const auto& inst : per_model) avgs.push_back(average_instances(inst));
  const std::size_t C = static_cast<std::size_t>(meta.W.cols());
  Matrix x(static_cast<Eigen::Index>(ref.size()), static_cast<Eigen::Index>(per_model.size() * C));
  for (std::size_t m = 0; m < avgs.size(); ++m) {
    if (avgs[m].size() != ref.size()) throw LengthMismatch("component models scored different post counts");
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (avgs[m][i].size() != C) throw DimMismatch("component score width");
      for (std::size_t c = 0; c < C; ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m * C + c)) = avgs[m][i][c];
    }
  }
  Matrix p = meta.predict_proba(x);
  std::vector<models::PredictionVector> out;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    std::vector<double> s(C);
    for (std::size_t c = 0; c < C; ++c) s[c] = p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    out.push_back({ref[i].post_id, s, models::decide_argmax(s), ref[i].label_true});
  }
  return out;
}

struct NestedResult {
  std::vector<eval::FoldReport> reports;
  std::vector<models::PredictionVector> predictions;  // matrix row order
};

/// Meta fit on the other folds' rows, evaluated on fold k, for every k.
inline NestedResult nested_evaluation(const StackingMatrix& sm, const FoldAssignment& folds, const ClassSet& classes,
                                      const MetaOptions& opt = {}) {
  NestedResult res;
  res.predictions.resize(sm.rows());
  for (int k = 0; k < folds.n_folds; ++k) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t r = 0; r < sm.rows(); ++r) (folds.fold[r] == k ? te : tr).push_back(static_cast<Eigen::Index>(r));
    if (te.empty()) continue;
    std::vector<std::size_t> ytr, yte, pred;
    for (auto r : tr) ytr.push_back(sm.labels[static_cast<std::size_t>(r)]);
    const MetaModel meta = fit_meta(sm.values(tr, Eigen::all), ytr, sm.n_classes, opt);
    const Matrix p = meta.predict_proba(sm.values(te, Eigen::all));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const auto r = static_cast<std::size_t>(te[static_cast<std::size_t>(i)]);
      std::vector<double> s(sm.n_classes);
      for (std::size_t c = 0; c < sm.n_classes; ++c) s[c] = p(i, static_cast<Eigen::Index>(c));
      const std::size_t d = models::decide_argmax(s);
      res.predictions[r] = {sm.post_ids[r], s, d, sm.labels[r]};
      yte.push_back(sm.labels[r]);
      pred.push_back(d);
    }
    res.reports.push_back(eval::make_fold_report("stacking", k, classes, yte, pred));
  }
  return res;
}

/// Meta model in the shared checkpoint format.
inline neural::Checkpoint meta_checkpoint(const MetaModel& meta, const std::vector<std::string>& model_ids,
                                          const ClassSet& classes, const MetaOptions& opt) {
  neural::Checkpoint ck;
  ck.arch_id = 4;
  ck.hyper = {{"kind", "stacking"}, {"components", model_ids}, {"classes", classes.names()}, {"lambda", opt.lambda}};
  ck.blobs.push_back(neural::to_blob<double>("meta.W", meta.W));
  ck.blobs.push_back(neural::to_blob<double>("meta.bias", meta.bias.transpose()));
  return ck;
}

inline MetaModel meta_from_checkpoint(const neural::Checkpoint& ck) {
  const auto* w = ck.find("meta.W");
  const auto* b = ck.find("meta.bias");
  if (ck.arch_id != 4 || !w || !b || b->cols != w->cols) throw ArchitectureMismatch("not a stacking meta checkpoint");
  MetaModel m{Matrix(w->rows, w->cols), Vector(b->cols)};
  neural::from_blob(*w, m.W);
  Matrix bt(1, b->cols);
  neural::from_blob(*b, bt);
  m.bias = bt.transpose();
  return m;
}

/// post_id,label,<model>_<class>... with full-precision scores.
inline void write_matrix_csv(std::ostream& out, const StackingMatrix& sm, const ClassSet& classes) {
  out << "post_id,label";
  for (const auto& m : sm.models)
    for (std::size_t c = 0; c < sm.n_classes; ++c) out << ',' << m << '_' << label_name(classes.at(c));
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < sm.rows(); ++r) {
    out << sm.post_ids[r] << ',' << label_name(classes.at(sm.labels[r]));
    for (Eigen::Index c = 0; c < sm.values.cols(); ++c) out << ',' << sm.values(static_cast<Eigen::Index>(r), c);
    out << '\n';
  }
}

inline nlohmann::json provenance_json(const StackingMatrix& sm, const ClassSet& classes) {
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t m = 0; m < sm.models.size(); ++m)
    blocks.push_back({{"model", sm.models[m]},
                      {"columns", {m * sm.n_classes, (m + 1) * sm.n_classes}},
                      {"fold_per_row", sm.fold[m]}});
  return {{"rows", sm.rows()}, {"cols", sm.cols()}, {"classes", classes.names()}, {"post_ids", sm.post_ids}, {"blocks", blocks}};
}

}  // namespace psyling::stacking
