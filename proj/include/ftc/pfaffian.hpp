#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

// Pfaffian of a dense antisymmetric matrix (A^T = -A, also for complex
// entries) by Parlett-Reid tridiagonalization with partial pivoting.
// pf(A)^2 = det(A); each row/column swap flips the sign.

namespace ftc {

template <typename Derived>
double antisymmetry_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a.derived() + a.derived().transpose()).cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar pfaffian(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a,
                double antisym_tol = 1e-10) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index n = a.rows();
  if (n != a.cols() || n % 2 != 0)
    throw std::invalid_argument("pfaffian: matrix must be square and of even dimension");
  if (n == 0) return Scalar(1);
  if (antisymmetry_defect(a) > antisym_tol)
    throw std::invalid_argument("pfaffian: input is not antisymmetric within tolerance");
  a = ((a - Matrix(a.transpose())) / Scalar(2)).eval();

  Scalar value(1);
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // pivot the largest entry of column k into row k+1
    Eigen::Index pivot;
    a.col(k).segment(k + 1, n - k - 1).cwiseAbs().maxCoeff(&pivot);
    pivot += k + 1;
    if (pivot != k + 1) {
      a.row(k + 1).swap(a.row(pivot));
      a.col(k + 1).swap(a.col(pivot));
      value = -value;
    }
    if (a(k + 1, k) == Scalar(0)) return Scalar(0);
    value *= a(k, k + 1);
    if (k + 2 < n) {
      const Eigen::Index m = n - k - 2;
      const Vector tau = a.row(k).segment(k + 2, m).transpose() / a(k, k + 1);
      const Vector col = a.col(k + 1).segment(k + 2, m);
      a.block(k + 2, k + 2, m, m).noalias() += tau * col.transpose();
      a.block(k + 2, k + 2, m, m).noalias() -= col * tau.transpose();
    }
  }
  return value;
}

}  // namespace ftc
