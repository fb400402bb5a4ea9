#pragma once

#include <Eigen/Dense>
#include <complex>

#include "ftc/model.hpp"

// Free-fermion representation of the kicked chain. Site s (0-based) carries
// the Majorana pair (2s, 2s+1); bond s couples (2s+1, 2s+2). One Floquet
// period maps the Majorana vector through the real orthogonal matrix V with
// gamma_m(n) = [V^n gamma(0)]_m.

namespace ftc {

// Coefficient matrices of the two half-period Hamiltonians, written as
// H = (1/4) sum_{ij} B_ij gamma_i gamma_j with i*B real antisymmetric.
// These return i*B directly.
Eigen::MatrixXd kick_generator(const ModelParams& params);
Eigen::MatrixXd ising_generator(const DisorderConfig& config,
                                const ModelParams& params);

// Heisenberg rotations of the two half periods, exp(-i*B) evaluated
// blockwise; their product ising_rotation * kick_rotation is the full
// period matrix.
Eigen::MatrixXd kick_rotation(const ModelParams& params);
Eigen::MatrixXd ising_rotation(const DisorderConfig& config,
                               const ModelParams& params);

// Full single-period matrix assembled from its banded form (half-bandwidth
// 3); validated orthogonal on construction.
Eigen::MatrixXd floquet_matrix(const DisorderConfig& config,
                               const ModelParams& params);

// Gaussian data of the evolving state pair (|0>, |1> = eta0^dag |0>) that
// encodes the staggered initial product state:
//   pair_correlations  G_ij = -i<0|gamma_i gamma_j|0>, real antisymmetric,
//                      G*G = -1, pf(G) = +1,
//   zero_mode_overlap  C_j(n) = <0|gamma_j(n) eta0^dag|0>,
//   initial_overlap    C_1(0), the fixed denominator of all expectations.
struct GaussianState {
  Eigen::MatrixXd pair_correlations;
  Eigen::VectorXcd zero_mode_overlap;
  std::complex<double> initial_overlap;

  int sites() const { return static_cast<int>(pair_correlations.rows()) / 2; }
};

// Builds the state at n = 0 by Bogoliubov-diagonalizing the coupling
// Hamiltonian, fixing the vacuum to even parity (pf(G) = +1) and reading the
// zero-mode overlap vector off the quasiparticle basis.
GaussianState initial_state(const DisorderConfig& config,
                            const ModelParams& params);

// G(n) = V^n G (V^T)^n, C(n) = V^n C.
GaussianState evolve(const GaussianState& state, const Eigen::MatrixXd& v,
                     long periods);

// <sigma^z_site> in the current state, evaluated as the Pfaffian of the
// matrix over gammas 0..2*site and the zero mode.
double local_sz(const GaussianState& state, int site);

double purity_defect(const GaussianState& state);

}  // namespace ftc
