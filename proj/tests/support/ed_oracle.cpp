#include "ed_oracle.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace ftc::ed {

namespace {
using Complex = std::complex<double>;
}

Eigen::VectorXcd staggered_state(int length) {
  unsigned index = 0;
  for (int s = 1; s < length; s += 2) index |= 1u << s;
  Eigen::VectorXcd state = Eigen::VectorXcd::Zero(1u << length);
  state[index] = 1.0;
  return state;
}

void apply_kick(Eigen::VectorXcd& state, const ModelParams& params) {
  const double theta = 0.5 * kPi * params.kick * params.t1;
  const Complex c(std::cos(theta), 0.0);
  const Complex s(0.0, -std::sin(theta));
  const unsigned dim = static_cast<unsigned>(state.size());
  for (int site = 0; site < params.length; ++site) {
    const unsigned mask = 1u << site;
    for (unsigned b = 0; b < dim; ++b) {
      if (b & mask) continue;
      const Complex a0 = state[b];
      const Complex a1 = state[b | mask];
      state[b] = c * a0 + s * a1;
      state[b | mask] = c * a1 + s * a0;
    }
  }
}

void apply_ising(Eigen::VectorXcd& state, const DisorderConfig& config,
                 const ModelParams& params) {
  const unsigned dim = static_cast<unsigned>(state.size());
  for (unsigned b = 0; b < dim; ++b) {
    double phase = 0.0;
    for (int bond = 0; bond + 1 < params.length; ++bond)
      phase += config.couplings[bond] * spin_sign(b, bond) *
               spin_sign(b, bond + 1);
    state[b] *= std::exp(Complex(0.0, -phase * params.t2));
  }
}

void apply_floquet(Eigen::VectorXcd& state, const DisorderConfig& config,
                   const ModelParams& params) {
  apply_kick(state, params);
  apply_ising(state, config, params);
}

double expect_sz(const Eigen::VectorXcd& state, int site) {
  double value = 0.0;
  for (unsigned b = 0; b < static_cast<unsigned>(state.size()); ++b)
    value += std::norm(state[b]) * spin_sign(b, site);
  return value;
}

double expect_szsz(const Eigen::VectorXcd& state, int site_a, int site_b) {
  double value = 0.0;
  for (unsigned b = 0; b < static_cast<unsigned>(state.size()); ++b)
    value += std::norm(state[b]) * spin_sign(b, site_a) * spin_sign(b, site_b);
  return value;
}

Eigen::MatrixXd sz_history(const DisorderConfig& config,
                           const ModelParams& params, int periods) {
  if (params.length > 14)
    throw std::invalid_argument("ed oracle: chain too long for dense states");
  Eigen::MatrixXd history(periods + 1, params.length);
  Eigen::VectorXcd state = staggered_state(params.length);
  for (int n = 0; n <= periods; ++n) {
    for (int site = 0; site < params.length; ++site)
      history(n, site) = expect_sz(state, site);
    if (n < periods) apply_floquet(state, config, params);
  }
  return history;
}

Eigen::MatrixXcd floquet_operator(const DisorderConfig& config,
                                  const ModelParams& params) {
  const unsigned dim = 1u << params.length;
  Eigen::MatrixXcd u(dim, dim);
  for (unsigned b = 0; b < dim; ++b) {
    Eigen::VectorXcd column = Eigen::VectorXcd::Zero(dim);
    column[b] = 1.0;
    apply_floquet(column, config, params);
    u.col(b) = column;
  }
  return u;
}

}  // namespace ftc::ed
