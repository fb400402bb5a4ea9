#include "ftc/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ftc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double orthogonality_defect(const Eigen::MatrixXd& v) {
  const Eigen::Index n = v.rows();
  Eigen::MatrixXd residual = v * v.transpose();
  residual -= Eigen::MatrixXd::Identity(n, n);
  return residual.norm();
}

bool is_orthogonal(const Eigen::MatrixXd& v, double tol) {
  return v.rows() == v.cols() && orthogonality_defect(v) <= tol;
}

Eigen::MatrixXd orthogonal_power(const Eigen::MatrixXd& v, long n) {
  if (v.rows() != v.cols())
    throw std::invalid_argument("orthogonal_power: matrix must be square");
  if (n < 0) throw std::invalid_argument("orthogonal_power: exponent must be >= 0");

  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(v.rows(), v.cols());
  Eigen::MatrixXd base = v;
  while (n > 0) {
    if (n & 1) result = (result * base).eval();
    n >>= 1;
    if (n > 0) base = (base * base).eval();
  }
  if (!is_orthogonal(result, 1e-9))
    throw std::runtime_error("orthogonal_power: result drifted off the orthogonal group");
  return result;
}

UnitaryLog unitary_log(const Eigen::MatrixXcd& u, double unitary_tol,
                       double branch_tol) {
  const Eigen::Index n = u.rows();
  if (n != u.cols()) throw std::invalid_argument("unitary_log: matrix must be square");
  if ((u * u.adjoint() - Eigen::MatrixXcd::Identity(n, n)).norm() > unitary_tol)
    throw std::invalid_argument("unitary_log: input is not unitary within tolerance");

  // The complex Schur form of a unitary matrix is diagonal, so the Schur
  // basis is a genuinely unitary eigenbasis even with degeneracies.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("unitary_log: Schur decomposition failed");

  UnitaryLog out;
  Eigen::VectorXd phases(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    phases[k] = std::arg(schur.matrixT()(k, k));
    if (kPi - std::abs(phases[k]) < branch_tol) out.near_branch_cut = true;
  }
  const Eigen::MatrixXcd& q = schur.matrixU();
  out.hermitian = q * phases.asDiagonal() * q.adjoint();
  return out;
}

OrthogonalLog orthogonal_log(const Eigen::MatrixXd& o, double orthogonal_tol,
                             double branch_tol) {
  if (!is_orthogonal(o, orthogonal_tol))
    throw std::invalid_argument("orthogonal_log: input is not orthogonal within tolerance");
  const UnitaryLog logu = unitary_log(o.cast<std::complex<double>>(),
                                      orthogonal_tol, branch_tol);
  // For real orthogonal input, i*h is real antisymmetric up to roundoff.
  Eigen::MatrixXd k = (std::complex<double>(0, 1) * logu.hermitian).real();
  k = ((k - k.transpose()) / 2.0).eval();
  return {k, logu.near_branch_cut};
}

Eigen::MatrixXd AntisymmetricCanonical::block_diagonal() const {
  const Eigen::Index n = basis.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < angles.size(); ++k) {
    d(2 * k, 2 * k + 1) = angles[k];
    d(2 * k + 1, 2 * k) = -angles[k];
  }
  return d;
}

AntisymmetricCanonical antisymmetric_canonical(const Eigen::MatrixXd& a,
                                               double zero_tol) {
  const Eigen::Index n = a.rows();
  if (n != a.cols() || n % 2 != 0)
    throw std::invalid_argument("antisymmetric_canonical: matrix must be square with even dimension");
  if (antisymmetry_defect(a) > 1e-10)
    throw std::invalid_argument("antisymmetric_canonical: input is not antisymmetric");

  // i*a is hermitian with spectrum {+-angle}. Eigenvectors come out
  // orthonormal, which keeps degenerate angles well separated into pairs.
  const Eigen::MatrixXcd ia =
      std::complex<double>(0, 1) * ((a - a.transpose()) / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(ia);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("antisymmetric_canonical: eigensolver failed");

  // Eigenvalues are sorted ascending; entries L.. are the non-negative half.
  const Eigen::Index pairs = n / 2;
  AntisymmetricCanonical out;
  out.basis.resize(n, n);
  out.angles.resize(pairs);

  // Near-zero eigenvalues need a joint treatment: their eigenvectors only
  // span the kernel as a set, so extract a real orthonormal kernel basis.
  std::vector<Eigen::Index> zero_like;
  for (Eigen::Index k = 0; k < n; ++k)
    if (std::abs(solver.eigenvalues()[k]) <= zero_tol) zero_like.push_back(k);
  const Eigen::Index kernel_dim = static_cast<Eigen::Index>(zero_like.size());
  if (kernel_dim % 2 != 0)
    throw std::runtime_error("antisymmetric_canonical: odd kernel dimension");

  if (kernel_dim > 0) {
    Eigen::MatrixXd candidates(n, 2 * kernel_dim);
    for (Eigen::Index c = 0; c < kernel_dim; ++c) {
      candidates.col(2 * c) = solver.eigenvectors().col(zero_like[c]).real();
      candidates.col(2 * c + 1) = solver.eigenvectors().col(zero_like[c]).imag();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(candidates);
    if (qr.rank() < kernel_dim)
      throw std::runtime_error("antisymmetric_canonical: kernel extraction failed");
    out.basis.leftCols(kernel_dim) =
        qr.householderQ() * Eigen::MatrixXd::Identity(n, kernel_dim);
    for (Eigen::Index k = 0; k < kernel_dim / 2; ++k) out.angles[k] = 0.0;
  }

  Eigen::Index pair = kernel_dim / 2;
  for (Eigen::Index k = 0; k < n && pair < pairs; ++k) {
    const double value = solver.eigenvalues()[k];
    if (value <= zero_tol) continue;
    // z = (x + i y)/sqrt(2) with a x = value * y, a y = -value * x; columns
    // (y, x) realize the block [[0, value], [-value, 0]].
    const Eigen::VectorXcd z = solver.eigenvectors().col(k);
    out.basis.col(2 * pair) = std::sqrt(2.0) * z.imag();
    out.basis.col(2 * pair + 1) = std::sqrt(2.0) * z.real();
    out.angles[pair] = value;
    ++pair;
  }
  if (pair != pairs)
    throw std::runtime_error("antisymmetric_canonical: spectrum did not pair up");
  return out;
}

}  // namespace ftc
