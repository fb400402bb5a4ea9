#include "ftc/eigenstates.hpp"

#include <cmath>
#include <stdexcept>

#include "ftc/pfaffian.hpp"

namespace ftc {

EffectiveHamiltonian effective_hamiltonian(const DisorderConfig& config,
                                           const ModelParams& params) {
  const Eigen::MatrixXd period =
      ising_rotation(config, params) * kick_rotation(params);
  // exp(k) = period with k antisymmetric; exp(-2 * generator) = period.
  const OrthogonalLog log = orthogonal_log(period, 1e-9);

  EffectiveHamiltonian out;
  out.generator = -log.antisymmetric / 2.0;
  out.near_branch_cut = log.near_branch_cut;
  out.modes = antisymmetric_canonical(-out.generator, 1e-12);
  return out;
}

EigenstateCovariance eigenstate_covariance(const EffectiveHamiltonian& h,
                                           const std::vector<bool>& occupied) {
  const Eigen::Index pairs = h.modes.angles.size();
  if (static_cast<Eigen::Index>(occupied.size()) != pairs)
    throw std::invalid_argument(
        "eigenstate_covariance: need one occupation flag per mode");

  EigenstateCovariance out;
  for (Eigen::Index k = 0; k < pairs; ++k)
    if (h.modes.angles[k] < 1e-9) out.ambiguous_occupation = true;

  const Eigen::Index n = 2 * pairs;
  Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    const double sign = occupied[k] ? -1.0 : 1.0;
    blocks(2 * k, 2 * k + 1) = sign;
    blocks(2 * k + 1, 2 * k) = -sign;
  }
  out.majorana = h.modes.basis * blocks * h.modes.basis.transpose();
  out.majorana = ((out.majorana - out.majorana.transpose()) / 2.0).eval();
  return out;
}

EigenstateCovariance ground_covariance(const EffectiveHamiltonian& h) {
  return eigenstate_covariance(
      h, std::vector<bool>(h.modes.angles.size(), false));
}

double zz_correlation_signed(const Eigen::MatrixXd& covariance, int site,
                             int distance) {
  const int length = static_cast<int>(covariance.rows()) / 2;
  if (site < 0 || distance < 0 || site + distance >= length)
    throw std::invalid_argument("zz_correlation: sites out of range");
  if (distance == 0) return 1.0;

  // product of bond operators i gamma_{2k+1} gamma_{2k+2} for the bonds
  // between the two sites; Wick gives (-1)^distance times the Pfaffian of
  // the covariance restricted to those 2*distance Majoranas.
  const int m = 2 * distance;
  Eigen::MatrixXd slice = covariance.block(2 * site + 1, 2 * site + 1, m, m);
  const double sign = (distance % 2 == 0) ? 1.0 : -1.0;
  const double value = sign * pfaffian(std::move(slice));
  if (std::abs(value) > 1.0 + 1e-6)
    throw std::runtime_error("zz_correlation: expectation left [-1, 1]");
  return value;
}

double zz_correlator(const Eigen::MatrixXd& covariance, int distance) {
  const int length = static_cast<int>(covariance.rows()) / 2;
  if (distance < 0 || distance >= length)
    throw std::invalid_argument("zz_correlator: distance out of range");
  const int site = (length - distance + 1) / 2 - 1;  // ceil((L-x)/2), 0-based
  return std::abs(zz_correlation_signed(covariance, site, distance));
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& covariance) {
  const int length = static_cast<int>(covariance.rows()) / 2;
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(length, length);
  for (int i = 0; i < length; ++i)
    for (int j = i + 1; j < length; ++j) {
      const double value = zz_correlation_signed(covariance, i, j - i);
      c(i, j) = value;
      c(j, i) = value;
    }
  return c;
}

double order_parameter_alpha(const Eigen::MatrixXd& covariance) {
  const Eigen::MatrixXd c = correlation_matrix(covariance);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("order_parameter_alpha: eigensolver failed");
  return solver.eigenvalues().maxCoeff();
}

}  // namespace ftc
