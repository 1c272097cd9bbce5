#pragma once

#include <cmath>
#include <optional>

#include "psyling/neural/tensor.hpp"
#include "psyling/random.hpp"

namespace psyling::neural {

/// Uniform(-bound, bound) fill, column-major element order.
template <class S>
void init_uniform(Mat<S>& m, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<S>(uniform(rng, -bound, bound));
}

/// y = x Wᵀ + b with W (out × in), b (1 × out).
template <class S>
class Linear {
 public:
  struct Cache {
    Mat<S> x;
  };

  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out)
      : W_(name + ".W", static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
        b_(name + ".b", 1, static_cast<Eigen::Index>(out)) {}

  void init(Rng& rng) {
    init_uniform(W_.value, 1.0 / std::sqrt(static_cast<double>(in_dim())), rng);
    b_.value.setZero();
  }

  std::size_t in_dim() const { return static_cast<std::size_t>(W_.value.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(W_.value.rows()); }

  Mat<S> forward(const Mat<S>& x, Cache* cache = nullptr) const {
    require_cols(x, W_.value.cols(), W_.name.c_str());
    if (cache) cache->x = x;
    Mat<S> y = x * W_.value.transpose();
    y.rowwise() += b_.value.row(0);
    return y;
  }

  /// Accumulates parameter gradients; returns dL/dx.
  Mat<S> backward(const Cache& cache, const Mat<S>& dy) {
    require_cols(dy, W_.value.rows(), W_.name.c_str());
    W_.grad.noalias() += dy.transpose() * cache.x;
    b_.grad += dy.colwise().sum();
    return dy * W_.value;
  }

  void params(ParamList<S>& out) {
    out.push_back(&W_);
    out.push_back(&b_);
  }

  Param<S>& weight() { return W_; }
  Param<S>& bias() { return b_; }

 private:
  Param<S> W_;
  Param<S> b_;
};

template <class S>
Mat<S> relu(const Mat<S>& x) {
  return x.cwiseMax(S(0));
}

/// dL/dx given dL/dy and the pre-activation x.
template <class S>
Mat<S> relu_backward(const Mat<S>& x, const Mat<S>& dy) {
  return (x.array() > S(0)).select(dy, Mat<S>::Zero(dy.rows(), dy.cols()));
}

/// Inverted dropout. With no rng (evaluation) or rate 0 it is the identity and
/// draws nothing. Masks hold 0 or 1/(1-rate).
template <class S>
Mat<S> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Mat<S> mask(rows, cols);
  const S keep = static_cast<S>(1.0 / (1.0 - rate));
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = uniform01(rng) >= rate ? keep : S(0);
  return mask;
}

template <class S>
Mat<S> apply_dropout(const Mat<S>& x, double rate, Rng* rng, std::optional<Mat<S>>* mask_out = nullptr) {
  if (rng == nullptr || rate <= 0.0) {
    if (mask_out) mask_out->reset();
    return x;
  }
  if (rate >= 1.0) throw ShapeMismatch("dropout rate must be in [0, 1)");
  Mat<S> mask = dropout_mask<S>(x.rows(), x.cols(), rate, *rng);
  Mat<S> y = x.cwiseProduct(mask);
  if (mask_out) *mask_out = std::move(mask);
  return y;
}

/// Linear, optional ReLU, optional dropout.
template <class S>
class DenseLayer {
 public:
  struct Cache {
    typename Linear<S>::Cache lin;
    Mat<S> pre;
    std::optional<Mat<S>> mask;
  };

  DenseLayer() = default;
  DenseLayer(const std::string& name, std::size_t in, std::size_t out, bool relu, double dropout)
      : lin_(name, in, out), relu_(relu), dropout_(dropout) {}

  void init(Rng& rng) { lin_.init(rng); }
  std::size_t out_dim() const { return lin_.out_dim(); }
  std::size_t in_dim() const { return lin_.in_dim(); }

  Mat<S> forward(const Mat<S>& x, Rng* rng, Cache* cache = nullptr) const {
    Mat<S> pre = lin_.forward(x, cache ? &cache->lin : nullptr);
    Mat<S> y = relu_ ? relu(pre) : pre;
    y = apply_dropout(y, dropout_, rng, cache ? &cache->mask : nullptr);
    if (cache) cache->pre = std::move(pre);
    return y;
  }

  Mat<S> backward(const Cache& cache, Mat<S> dy) {
    if (cache.mask) dy = dy.cwiseProduct(*cache.mask);
    if (relu_) dy = relu_backward(cache.pre, dy);
    return lin_.backward(cache.lin, dy);
  }

  void params(ParamList<S>& out) { lin_.params(out); }
  Linear<S>& linear() { return lin_; }

 private:
  Linear<S> lin_;
  bool relu_ = false;
  double dropout_ = 0.0;
};

}  // namespace psyling::neural
