#pragma once

// Central finite-difference verification of analytic gradients.
//   rel = |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)

#include <algorithm>
#include <cmath>
#include <string>

#include "psyling/neural/tensor.hpp"
#include "psyling/random.hpp"

namespace psyling::neural {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "param[row,col]"
  std::size_t checked = 0;
};

struct GradCheckOptions {
  double h = 1e-5;
  std::size_t max_coords_per_param = 0;  // 0 = every coordinate
  std::uint64_t seed = 0;
};

/// loss() must be a pure function of the parameter values; backward() must
/// leave dL/dparam in each Param::grad (it is zeroed first).
template <class LossFn, class BackwardFn>
GradCheckResult grad_check(const ParamList<double>& params, LossFn&& loss, BackwardFn&& backward,
                           GradCheckOptions opt = {}) {
  for (auto* p : params) p->zero_grad();
  backward();
  GradCheckResult res;
  Rng rng(opt.seed);
  for (auto* p : params) {
    const Mat<double> analytic = p->grad;
    const auto n = static_cast<std::size_t>(p->value.size());
    std::vector<std::size_t> coords(n);
    for (std::size_t k = 0; k < n; ++k) coords[k] = k;
    if (opt.max_coords_per_param > 0 && n > opt.max_coords_per_param) {
      shuffle(std::span<std::size_t>(coords), rng);
      coords.resize(opt.max_coords_per_param);
    }
    for (std::size_t k : coords) {
      double& w = p->value.data()[k];
      const double saved = w;
      w = saved + opt.h;
      const double up = loss();
      w = saved - opt.h;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2.0 * opt.h);
      const double a = analytic.data()[k];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      ++res.checked;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        const auto r = static_cast<Eigen::Index>(k) % p->value.rows();
        const auto c = static_cast<Eigen::Index>(k) / p->value.rows();
        res.worst = p->name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
      }
    }
  }
  return res;
}

}  // namespace psyling::neural
