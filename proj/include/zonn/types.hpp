#pragma once

#include <Eigen/Core>

namespace zonn {

template <class Scalar_, int Rows_ = Eigen::Dynamic>
using colvec_type = Eigen::Matrix<Scalar_, Rows_, 1>;

template <class Scalar_, int Rows_ = Eigen::Dynamic, int Cols_ = Eigen::Dynamic>
using colmat_type = Eigen::Matrix<Scalar_, Rows_, Cols_, Eigen::ColMajor>;

using Vector = colvec_type<double>;
using Matrix = colmat_type<double>;

/// A point of the normalized input space [0,1]^d.
using InputPoint = Vector;

/// Checks that every component lies in [0, 1].
template <class Derived>
bool in_unit_cube(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite() && (x.size() == 0 || (x.minCoeff() >= 0 && x.maxCoeff() <= 1));
}

}  // namespace zonn
