#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "zonn/error.hpp"
#include "zonn/types.hpp"

namespace zonn {

/// Distance from the probability simplex tolerated (and absorbed by
/// renormalization) before a vector is rejected.
inline constexpr double simplex_tolerance = 1e-9;

/// Tolerance actually used for scalar type `Scalar`; single precision
/// cannot meet the double-precision bound.
template <class Scalar>
constexpr double simplex_tolerance_for() {
  return std::max(simplex_tolerance, 64.0 * static_cast<double>(std::numeric_limits<Scalar>::epsilon()));
}

/// True if `p` has at least 2 finite components in [0,1] summing to 1
/// within `tol`.
template <class Derived>
bool is_probability_vector(const Eigen::MatrixBase<Derived>& p,
                           double tol = simplex_tolerance_for<typename Derived::Scalar>()) {
  if (p.size() < 2 || !p.allFinite()) return false;
  if (p.minCoeff() < -tol || p.maxCoeff() > 1 + tol) return false;
  return std::abs(static_cast<double>(p.sum()) - 1.0) <= tol;
}

/// Shannon entropy in base C = p.size(), so the result lies in [0, 1]:
/// 1 for the uniform vector, 0 for a one-hot vector (0 log 0 = 0).
template <class Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  require(is_probability_vector(p), ErrorKind::parameter, "invalid probability distribution");
  const auto q = p.cwiseMax(Scalar(0)).eval();
  const Scalar total = q.sum();
  const Scalar log_c = std::log(Scalar(p.size()));
  Scalar h = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const Scalar pi = q(i) / total;
    if (pi > 0) h -= pi * std::log(pi);
  }
  return std::clamp(h / log_c, Scalar(0), Scalar(1));
}

}  // namespace zonn
