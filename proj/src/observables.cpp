#include "ftc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ftc/linalg.hpp"

namespace ftc {

double autocorrelation(const GaussianState& state, int site) {
  return staggered_sign(site) * local_sz(state, site);
}

double staggered_autocorrelation_sum(const GaussianState& state,
                                     int period_parity) {
  const int sign = (period_parity % 2 == 0) ? 1 : -1;
  double sum = 0.0;
  for (int site = 0; site < state.sites(); ++site)
    sum += autocorrelation(state, site);
  return sign * sum;
}

double coarse_grained_correlation(const GaussianState& initial,
                                  const Eigen::MatrixXd& v, int t,
                                  int window) {
  const int grid[1] = {t};
  return trajectory(initial, v, grid, window)[0];
}

std::vector<double> trajectory(const GaussianState& initial,
                               const Eigen::MatrixXd& v,
                               std::span<const int> t_values, int window) {
  if (window < 1) throw std::invalid_argument("trajectory: window must be >= 1");
  for (int t : t_values)
    if (t < 0) throw std::invalid_argument("trajectory: offsets must be >= 0");

  // Collect the union of needed periods, then sweep forward once, jumping
  // over gaps between measurement windows.
  std::vector<int> periods;
  for (int t : t_values)
    for (int n = t + 1; n <= t + window; ++n) periods.push_back(n);
  std::sort(periods.begin(), periods.end());
  periods.erase(std::unique(periods.begin(), periods.end()), periods.end());

  std::vector<double> staggered(periods.empty() ? 0 : periods.back() + 1, 0.0);
  GaussianState state = initial;
  int now = 0;
  for (int n : periods) {
    state = evolve(state, v, n - now);
    now = n;
    staggered[n] = staggered_autocorrelation_sum(state, n);
  }

  const int sites = initial.sites();
  std::vector<double> out;
  out.reserve(t_values.size());
  for (int t : t_values) {
    double sum = 0.0;
    for (int n = t + 1; n <= t + window; ++n) sum += staggered[n];
    out.push_back(std::abs(sum) / (sites * window));
  }
  return out;
}

double ensemble_average(std::span<const double> values, Average mode) {
  if (values.empty())
    throw std::invalid_argument("ensemble_average: empty sample");
  if (mode == Average::mean) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  double sum = 0.0;
  for (double v : values) {
    if (v <= 0.0)
      throw std::invalid_argument(
          "ensemble_average: typical average needs positive values");
    sum += std::log(v);
  }
  return std::exp(sum / static_cast<double>(values.size()));
}

FlooredValues floor_positive(std::span<const double> values, double floor) {
  FlooredValues out;
  out.values.reserve(values.size());
  for (double v : values) {
    if (v < floor) {
      out.values.push_back(floor);
      ++out.floored;
    } else {
      out.values.push_back(v);
    }
  }
  return out;
}

}  // namespace ftc
