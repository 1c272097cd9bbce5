#pragma once

#include <algorithm>
#include <cmath>

#include "psyling/neural/tensor.hpp"

namespace psyling::neural {

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy over batch and classes; scores are clamped to
/// [ε, 1-ε]. If d_scores is given it receives dL/dscores (zero where clamped).
template <class S>
double bce_loss(const Mat<S>& scores, const Mat<S>& targets, Mat<S>* d_scores = nullptr) {
  require_shape(scores.rows() == targets.rows() && scores.cols() == targets.cols(), "bce: shape mismatch");
  const double n = static_cast<double>(scores.size());
  if (d_scores) d_scores->setZero(scores.rows(), scores.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < scores.cols(); ++j)
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      const double raw = static_cast<double>(scores(i, j));
      const double p = std::clamp(raw, kBceEpsilon, 1.0 - kBceEpsilon);
      const double y = static_cast<double>(targets(i, j));
      total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
      if (d_scores && p == raw) (*d_scores)(i, j) = static_cast<S>((-y / p + (1.0 - y) / (1.0 - p)) / n);
    }
  return total / n;
}

/// Loss and dL/dlogits for sigmoid outputs, fused: (p - y)/n where unclamped.
template <class S>
double sigmoid_bce_loss(const Mat<S>& logits, const Mat<S>& targets, Mat<S>* d_logits = nullptr) {
  Mat<S> p = sigmoid<S>(logits);
  double loss = bce_loss(p, targets);
  if (d_logits) {
    const double n = static_cast<double>(p.size());
    d_logits->resize(p.rows(), p.cols());
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double pi = static_cast<double>(p(i, j));
        const bool clamped = pi < kBceEpsilon || pi > 1.0 - kBceEpsilon;
        (*d_logits)(i, j) = clamped ? S(0) : static_cast<S>((pi - static_cast<double>(targets(i, j))) / n);
      }
  }
  return loss;
}

}  // namespace psyling::neural
