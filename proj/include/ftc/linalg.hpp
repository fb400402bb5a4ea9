#pragma once

#include <Eigen/Dense>
#include <complex>

// Shared dense-matrix kernels: integer powers of orthogonal matrices,
// principal logarithms of unitary/orthogonal matrices, and the canonical
// block form of real antisymmetric matrices.

namespace ftc {

double orthogonality_defect(const Eigen::MatrixXd& v);

bool is_orthogonal(const Eigen::MatrixXd& v, double tol = 1e-10);

// v^n by repeated squaring, n >= 0. The result is re-validated.
Eigen::MatrixXd orthogonal_power(const Eigen::MatrixXd& v, long n);

// Principal logarithm of a unitary matrix: hermitian h with exp(i h) = u and
// all eigenphases in (-pi, pi]. near_branch_cut is set when an eigenphase
// lies within branch_tol of the cut at +-pi, where the principal branch is
// ambiguous.
struct UnitaryLog {
  Eigen::MatrixXcd hermitian;
  bool near_branch_cut = false;
};

UnitaryLog unitary_log(const Eigen::MatrixXcd& u, double unitary_tol = 1e-10,
                       double branch_tol = 1e-9);

// Real antisymmetric logarithm of a real orthogonal matrix with det +1:
// exp(k) = o, eigenvalue phases in (-pi, pi].
struct OrthogonalLog {
  Eigen::MatrixXd antisymmetric;
  bool near_branch_cut = false;
};

OrthogonalLog orthogonal_log(const Eigen::MatrixXd& o,
                             double orthogonal_tol = 1e-10,
                             double branch_tol = 1e-9);

// Canonical form of a real antisymmetric matrix a = w d w^T with w real
// orthogonal and d built of 2x2 blocks [[0, angle], [-angle, 0]]; block k
// occupies rows/columns (2k, 2k+1). Angles are >= 0 and sorted ascending,
// so any kernel of a comes first.
struct AntisymmetricCanonical {
  Eigen::MatrixXd basis;   // w
  Eigen::VectorXd angles;  // size n/2
  Eigen::MatrixXd block_diagonal() const;
};

AntisymmetricCanonical antisymmetric_canonical(const Eigen::MatrixXd& a,
                                               double zero_tol = 1e-12);

}  // namespace ftc
