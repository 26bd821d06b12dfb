#pragma once

#include "betarestrict/errors.hpp"
#include "betarestrict/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace betarestrict {

/// Lower Cholesky factor of a symmetric positive definite matrix.
///
/// Hand-rolled instead of Eigen::LLT so that a failure can report which
/// pivot went non-positive.
template <typename Derived>
Matrix<typename Derived::Scalar> cholesky_lower(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Index p = a.rows();
  if (a.cols() != p) throw ShapeError("cholesky: matrix is not square");

  Matrix<Scalar> l = Matrix<Scalar>::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    Scalar d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > Scalar(0)) || !std::isfinite(d)) {
      throw SingularMatrixError("cholesky: matrix is not positive definite", j);
    }
    const Scalar ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Index i = j + 1; i < p; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
    }
  }
  return l;
}

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& a, const char* what, double tol = 1e-10) {
  if (a.rows() != a.cols()) throw ShapeError(std::string(what) + ": matrix is not square");
  const double scale = std::max(1.0, static_cast<double>(a.cwiseAbs().maxCoeff()));
  if (static_cast<double>((a - a.transpose()).cwiseAbs().maxCoeff()) > tol * scale) {
    throw DomainError(std::string(what) + ": matrix is not symmetric");
  }
}

/// Solves A X = B for symmetric positive definite A.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> spd_solve(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  require_symmetric(a, "spd_solve");
  if (b.rows() != a.rows()) throw ShapeError("spd_solve: right-hand side has wrong row count");
  const auto l = cholesky_lower(a);
  Matrix<typename DerivedA::Scalar> x = l.template triangularView<Eigen::Lower>().solve(b);
  l.transpose().template triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

template <typename Derived>
Matrix<typename Derived::Scalar> spd_inverse(const Eigen::MatrixBase<Derived>& a) {
  using M = Matrix<typename Derived::Scalar>;
  M inv = spd_solve(a, M::Identity(a.rows(), a.rows()));
  return (inv + inv.transpose()) / 2;
}

}  // namespace betarestrict
