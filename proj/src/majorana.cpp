#include "ftc/majorana.hpp"

#include <cmath>
#include <stdexcept>

#include "ftc/linalg.hpp"
#include "ftc/pfaffian.hpp"

namespace ftc {

namespace {

void check_inputs(const DisorderConfig& config, const ModelParams& params) {
  params.validate();
  if (config.couplings.size() != params.length - 1)
    throw std::invalid_argument("majorana: coupling count must be length-1");
  if ((config.couplings.array() < 0.0).any())
    throw std::invalid_argument("majorana: couplings must be non-negative");
}

}  // namespace

Eigen::MatrixXd kick_generator(const ModelParams& params) {
  params.validate();
  const int n = 2 * params.length;
  const double angle = kPi * params.kick * params.t1;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < params.length; ++s) {
    b(2 * s, 2 * s + 1) = angle;
    b(2 * s + 1, 2 * s) = -angle;
  }
  return b;
}

Eigen::MatrixXd ising_generator(const DisorderConfig& config,
                                const ModelParams& params) {
  check_inputs(config, params);
  const int n = 2 * params.length;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s + 1 < params.length; ++s) {
    const double angle = 2.0 * config.couplings[s] * params.t2;
    b(2 * s + 1, 2 * s + 2) = -angle;
    b(2 * s + 2, 2 * s + 1) = angle;
  }
  return b;
}

Eigen::MatrixXd kick_rotation(const ModelParams& params) {
  params.validate();
  const int n = 2 * params.length;
  const double c = std::cos(kPi * params.kick * params.t1);
  const double s = std::sin(kPi * params.kick * params.t1);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int site = 0; site < params.length; ++site) {
    v(2 * site, 2 * site) = c;
    v(2 * site, 2 * site + 1) = -s;
    v(2 * site + 1, 2 * site) = s;
    v(2 * site + 1, 2 * site + 1) = c;
  }
  return v;
}

Eigen::MatrixXd ising_rotation(const DisorderConfig& config,
                               const ModelParams& params) {
  check_inputs(config, params);
  const int n = 2 * params.length;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int s = 0; s + 1 < params.length; ++s) {
    const double c = std::cos(2.0 * config.couplings[s] * params.t2);
    const double w = std::sin(2.0 * config.couplings[s] * params.t2);
    v(2 * s + 1, 2 * s + 1) = c;
    v(2 * s + 1, 2 * s + 2) = w;
    v(2 * s + 2, 2 * s + 1) = -w;
    v(2 * s + 2, 2 * s + 2) = c;
  }
  return v;
}

Eigen::MatrixXd floquet_matrix(const DisorderConfig& config,
                               const ModelParams& params) {
  check_inputs(config, params);
  const int length = params.length;
  const int n = 2 * length;
  const double cg = std::cos(kPi * params.kick * params.t1);
  const double sg = std::sin(kPi * params.kick * params.t1);

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  v(0, 0) = cg;
  v(0, 1) = -sg;
  v(n - 1, n - 2) = sg;
  v(n - 1, n - 1) = cg;
  for (int b = 0; b + 1 < length; ++b) {
    const double cj = std::cos(2.0 * config.couplings[b] * params.t2);
    const double sj = std::sin(2.0 * config.couplings[b] * params.t2);
    const int row = 2 * b + 1;  // evolved gamma_{2m} of bond m = b+1
    v(row, 2 * b) = cj * sg;
    v(row, 2 * b + 1) = cj * cg;
    v(row, 2 * b + 2) = sj * cg;
    v(row, 2 * b + 3) = -sj * sg;
    v(row + 1, 2 * b) = -sj * sg;
    v(row + 1, 2 * b + 1) = -sj * cg;
    v(row + 1, 2 * b + 2) = cj * cg;
    v(row + 1, 2 * b + 3) = -cj * sg;
  }
  if (orthogonality_defect(v) > 1e-8)
    throw std::runtime_error("floquet_matrix: assembled matrix is not orthogonal");
  return v;
}

GaussianState initial_state(const DisorderConfig& config,
                            const ModelParams& params) {
  check_inputs(config, params);
  const int length = params.length;
  const int n = 2 * length;

  // Anchor Hamiltonian sum_s J_s sigma^z_s sigma^z_{s+1} in Majorana form
  // (i/4) sum a_ij gamma_i gamma_j. Any positive couplings share the same
  // ground-state pair, so fall back to unit strength when a coupling is too
  // small to separate the zero mode.
  const bool tiny = (config.couplings.size() > 0) &&
                    (config.couplings.minCoeff() < 1e-6);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s + 1 < length; ++s) {
    const double j = tiny ? 1.0 : config.couplings[s];
    a(2 * s + 1, 2 * s + 2) = 2.0 * j;
    a(2 * s + 2, 2 * s + 1) = -2.0 * j;
  }

  AntisymmetricCanonical canon = antisymmetric_canonical(a, 1e-8);
  if (canon.angles[0] >= 1e-8)
    throw std::runtime_error("initial_state: coupling Hamiltonian has no zero mode");
  if (length > 1 && canon.angles[1] < 1e-8)
    throw std::runtime_error("initial_state: zero mode is not unique");

  // Even-parity vacuum: pf(G) = det(W); swapping the zero-mode columns
  // toggles the occupation of the zero mode and with it the parity.
  Eigen::MatrixXd w = canon.basis;
  if (w.determinant() < 0.0) w.col(0).swap(w.col(1));

  Eigen::MatrixXd g_blocks = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < length; ++p) {
    g_blocks(2 * p, 2 * p + 1) = 1.0;
    g_blocks(2 * p + 1, 2 * p) = -1.0;
  }

  GaussianState state;
  state.pair_correlations = w * g_blocks * w.transpose();
  state.pair_correlations =
      ((state.pair_correlations - state.pair_correlations.transpose()) / 2.0)
          .eval();
  state.zero_mode_overlap =
      w.col(0).cast<std::complex<double>>() -
      std::complex<double>(0, 1) * w.col(1).cast<std::complex<double>>();
  state.initial_overlap = state.zero_mode_overlap[0];

  if (std::abs(state.initial_overlap) < 1e-10)
    throw std::runtime_error("initial_state: degenerate mapping, |C_1| too small");
  if (purity_defect(state) > 1e-8)
    throw std::runtime_error("initial_state: vacuum covariance is not pure");
  return state;
}

GaussianState evolve(const GaussianState& state, const Eigen::MatrixXd& v,
                     long periods) {
  if (periods < 0) throw std::invalid_argument("evolve: periods must be >= 0");
  if (periods == 0) return state;
  const Eigen::MatrixXd vn = (periods == 1) ? v : orthogonal_power(v, periods);
  GaussianState out;
  out.pair_correlations = vn * state.pair_correlations * vn.transpose();
  out.pair_correlations =
      ((out.pair_correlations - out.pair_correlations.transpose()) / 2.0).eval();
  out.zero_mode_overlap = vn * state.zero_mode_overlap;
  out.initial_overlap = state.initial_overlap;
  return out;
}

double local_sz(const GaussianState& state, int site) {
  const int length = state.sites();
  if (site < 0 || site >= length)
    throw std::invalid_argument("local_sz: site out of range");

  // sigma^z_site is a string over gammas 0..2*site; together with eta0^dag
  // it closes into the Pfaffian of a (2*site+2)-dimensional matrix.
  const int m = 2 * site + 2;
  const std::complex<double> iu(0, 1);
  Eigen::MatrixXcd block(m, m);
  block.topLeftCorner(m - 1, m - 1) =
      iu * state.pair_correlations.topLeftCorner(m - 1, m - 1);
  block.col(m - 1).head(m - 1) = state.zero_mode_overlap.head(m - 1);
  block.row(m - 1).head(m - 1) = -state.zero_mode_overlap.head(m - 1).transpose();
  block(m - 1, m - 1) = 0.0;

  // i^site prefactor
  static const std::complex<double> powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::complex<double> value =
      powers[site % 4] * pfaffian(std::move(block)) / state.initial_overlap;
  const double result = value.real();
  if (std::abs(result) > 1.0 + 1e-6)
    throw std::runtime_error("local_sz: expectation left [-1, 1]");
  return result;
}

double purity_defect(const GaussianState& state) {
  const Eigen::Index n = state.pair_correlations.rows();
  Eigen::MatrixXd square = state.pair_correlations * state.pair_correlations;
  square += Eigen::MatrixXd::Identity(n, n);
  return square.cwiseAbs().maxCoeff();
}

}  // namespace ftc
