#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ftc/majorana.hpp"
#include "ftc/model.hpp"

// Staggered autocorrelations and their space-time coarse graining. The
// initial state is a sigma^z product state, so the autocorrelator reduces to
// the sign pattern times the evolved local magnetization.

namespace ftc {

double autocorrelation(const GaussianState& state, int site);

// Sum over sites of autocorrelation * (-1)^n at the state's period n; the
// sign is passed in because the state does not carry its time stamp.
double staggered_autocorrelation_sum(const GaussianState& state,
                                     int period_parity);

// Coarse-grained correlation at offset t: site and period average of the
// staggered autocorrelator over periods t+1 .. t+window, absolute value.
double coarse_grained_correlation(const GaussianState& initial,
                                  const Eigen::MatrixXd& v, int t, int window);

// Batched version sharing one evolution sweep across a whole offset grid;
// returns one value per entry of t_values (which need not be sorted).
std::vector<double> trajectory(const GaussianState& initial,
                               const Eigen::MatrixXd& v,
                               std::span<const int> t_values, int window);

enum class Average { mean, typical };

// Arithmetic or geometric disorder average. The typical average requires
// strictly positive values; callers floor vanishing observables first.
double ensemble_average(std::span<const double> values, Average mode);

struct FlooredValues {
  std::vector<double> values;
  int floored = 0;
};

FlooredValues floor_positive(std::span<const double> values,
                             double floor = 1e-12);

}  // namespace ftc
