#pragma once

// Dense tensors for the neural core. A batch is a matrix with one row per
// example; a sequence batch is one such matrix per timestep. Scalar is double
// for verification runs and float for training runs.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "psyling/error.hpp"

namespace psyling::neural {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

/// seq[t] is (batch × dim); all timesteps share the batch size.
template <class S>
using Seq = std::vector<Mat<S>>;

/// Valid prefix length per batch row; timesteps at or beyond it are padding.
using Lengths = std::vector<std::size_t>;

template <class S>
struct Param {
  std::string name;
  Mat<S> value;
  Mat<S> grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Mat<S>::Zero(rows, cols)), grad(Mat<S>::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

template <class S>
using ParamList = std::vector<Param<S>*>;

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeMismatch(what);
}

template <class D>
void require_cols(const Eigen::MatrixBase<D>& m, Eigen::Index cols, const char* where) {
  require_shape(m.cols() == cols, std::string(where) + ": expected " + std::to_string(cols) +
                                      " columns, got " + std::to_string(m.cols()));
}

template <class S>
void require_finite(const Mat<S>& m, const char* where) {
  if (!m.allFinite()) throw ShapeMismatch(std::string(where) + ": non-finite entry");
}

template <class S>
Mat<S> sigmoid(const Mat<S>& z) {
  return (S(1) / (S(1) + (-z.array()).exp())).matrix();
}

}  // namespace psyling::neural
