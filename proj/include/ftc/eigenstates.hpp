#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ftc/linalg.hpp"
#include "ftc/majorana.hpp"
#include "ftc/model.hpp"

// Floquet eigenstates via the effective Hamiltonian of one period. With
// h = -i * generator, exp(-i 2 h) equals the product of the two half-period
// rotations; its quasiparticle modes define Gaussian eigenstates whose
// sigma^z correlations come out of Pfaffians.

namespace ftc {

struct EffectiveHamiltonian {
  // i * h_eff, real antisymmetric; exp(-2 * generator) reproduces
  // ising_rotation * kick_rotation.
  Eigen::MatrixXd generator;
  // canonical form of -generator; its angles are the quasienergies
  // epsilon_k >= 0 (the spectrum of h_eff is the paired set {+-epsilon_k})
  AntisymmetricCanonical modes;
  // set when a quasienergy sits at the edge pi/2 of the principal branch
  bool near_branch_cut = false;

  const Eigen::VectorXd& quasienergies() const { return modes.angles; }
};

EffectiveHamiltonian effective_hamiltonian(const DisorderConfig& config,
                                           const ModelParams& params);

// Majorana covariance M_ij = -i<phi|gamma_i gamma_j|phi> of the eigenstate
// with the given quasiparticle occupations (empty = the lowest eigenstate;
// occupying mode k flips the sign of its block).
struct EigenstateCovariance {
  Eigen::MatrixXd majorana;
  bool ambiguous_occupation = false;  // a quasienergy is too close to zero
};

EigenstateCovariance eigenstate_covariance(const EffectiveHamiltonian& h,
                                           const std::vector<bool>& occupied);

EigenstateCovariance ground_covariance(const EffectiveHamiltonian& h);

// Signed <phi|sigma^z_site sigma^z_{site+distance}|phi> through the string
// of bond operators, a Pfaffian over 2*distance consecutive Majoranas.
double zz_correlation_signed(const Eigen::MatrixXd& covariance, int site,
                             int distance);

// |<sigma^z_j sigma^z_{j+x}>| at the centered site j = ceil((L-x)/2), the
// boundary-minimizing profile.
double zz_correlator(const Eigen::MatrixXd& covariance, int distance);

// Full signed correlation matrix C_ij = <sigma^z_i sigma^z_j>, unit diagonal.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& covariance);

// Largest eigenvalue of the correlation matrix; 1 without spatial order,
// extensive with long-range order.
double order_parameter_alpha(const Eigen::MatrixXd& covariance);

}  // namespace ftc
