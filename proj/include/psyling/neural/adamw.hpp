#pragma once

// AdamW with decoupled weight decay:
//   p ← p - lr·wd·p
//   m ← β1 m + (1-β1) g        v ← β2 v + (1-β2) g²
//   p ← p - lr · (m / (1-β1ᵗ)) / (sqrt(v / (1-β2ᵗ)) + ε)

#include <cmath>
#include <vector>

#include "psyling/neural/tensor.hpp"

namespace psyling::neural {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

template <class S>
class AdamW {
 public:
  AdamW(ParamList<S> params, AdamWConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    for (auto* p : params_) {
      m_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const auto lr = static_cast<S>(cfg_.lr), decay = static_cast<S>(1.0 - cfg_.lr * cfg_.weight_decay);
    const auto b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
    const auto eps = static_cast<S>(cfg_.eps);
    const auto s1 = static_cast<S>(bc1), s2 = static_cast<S>(bc2);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Param<S>& p = *params_[k];
      require_shape(p.grad.rows() == p.value.rows() && p.grad.cols() == p.value.cols(),
                    "adamw: gradient shape differs for " + p.name);
      p.value *= decay;
      m_[k] = b1 * m_[k] + (S(1) - b1) * p.grad;
      v_[k] = b2 * v_[k] + (S(1) - b2) * p.grad.cwiseProduct(p.grad);
      p.value.array() -= lr * (m_[k].array() / s1) / ((v_[k].array() / s2).sqrt() + eps);
    }
  }

  std::size_t steps() const { return t_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  ParamList<S> params_;
  AdamWConfig cfg_;
  std::vector<Mat<S>> m_, v_;
  std::size_t t_ = 0;
};

template <class S>
void zero_grads(const ParamList<S>& params) {
  for (auto* p : params) p->zero_grad();
}

/// Rescales all gradients so their joint L2 norm is at most max_norm; returns
/// the norm before clipping.
template <class S>
double clip_grad_norm(const ParamList<S>& params, double max_norm) {
  double sq = 0.0;
  for (auto* p : params) sq += static_cast<double>(p->grad.squaredNorm());
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const auto scale = static_cast<S>(max_norm / (norm + 1e-12));
    for (auto* p : params) p->grad *= scale;
  }
  return norm;
}

}  // namespace psyling::neural
