#pragma once

#include <Eigen/Dense>

#include "ftc/model.hpp"

// Dense 2^L statevector reference for the kicked chain, independent of the
// free-fermion code path. Basis index bit s set means spin down on site s;
// usable up to L ~ 12.

namespace ftc::ed {

// sigma^z eigenvalue of site `site` in basis state `basis`
inline int spin_sign(unsigned basis, int site) {
  return (basis >> site) & 1u ? -1 : 1;
}

// |up down up down ...>
Eigen::VectorXcd staggered_state(int length);

void apply_kick(Eigen::VectorXcd& state, const ModelParams& params);
void apply_ising(Eigen::VectorXcd& state, const DisorderConfig& config,
                 const ModelParams& params);

// one period: kick first, then couplings
void apply_floquet(Eigen::VectorXcd& state, const DisorderConfig& config,
                   const ModelParams& params);

double expect_sz(const Eigen::VectorXcd& state, int site);
double expect_szsz(const Eigen::VectorXcd& state, int site_a, int site_b);

// <sigma^z_site(n)> for n = 0..periods along the evolution from the
// staggered initial state; rows are periods, columns sites.
Eigen::MatrixXd sz_history(const DisorderConfig& config,
                           const ModelParams& params, int periods);

// dense one-period operator, for eigenstate-level checks
Eigen::MatrixXcd floquet_operator(const DisorderConfig& config,
                                  const ModelParams& params);

}  // namespace ftc::ed
