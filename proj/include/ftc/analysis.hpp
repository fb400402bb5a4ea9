#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ftc/model.hpp"
#include "ftc/observables.hpp"

// Statistical post-processing: exponential relaxation fits, quality-of-
// collapse optimization for the one- and two-variable finite-size-scaling
// forms, and bootstrap errors over disorder realizations.

namespace ftc {

// ---------------------------------------------------------------- relaxation

// Least-squares fit of amplitude * exp(-t/tau) + plateau.
struct RelaxationFit {
  double amplitude = 0.0;
  double plateau = 0.0;
  double tau = 1.0;
  double sse = 0.0;
  bool degenerate = false;  // |amplitude| < 1e-3, nothing decays
  bool converged = false;
  int iterations = 0;
};

RelaxationFit fit_relaxation(std::span<const double> t,
                             std::span<const double> values);

// ------------------------------------------------------------------ collapse

struct CollapseOptions {
  double g_critical = 0.9;
  int neighbors = 4;          // distinct abscissas per local fit
  int grid = 25;              // coarse-search points per parameter
  double a_min = -2.0, a_max = 2.0;
  double nu_min = 0.3, nu_max = 4.0;
  double beta_min = -1.0, beta_max = 2.0;
  double b_min = 0.05, b_max = 1.5;
  double t0_min = 0.2, t0_max = 50.0;
  double flat_tol = 1e-3;     // relative grid variation below this is flagged
};

// one row of the size/tuning table, value = disorder-averaged observable
struct ScalingPoint {
  double size;
  double g;
  double value;
};

// value = L^{-a} f(delta L^{1/nu})
struct ScalingFit1D {
  double exponent_a = 0.0;
  double nu = 1.0;
  double objective = 0.0;
  bool unidentifiable = false;
};

ScalingFit1D collapse_1d(std::span<const ScalingPoint> points,
                         const ModelParams& params,
                         const CollapseOptions& options = {});

// objective evaluated at explicit exponents (used by tests and bootstrap)
double collapse_1d_objective(std::span<const ScalingPoint> points,
                             const ModelParams& params,
                             const CollapseOptions& options, double exponent_a,
                             double nu);

// downhill refinement from a known starting point, skipping the coarse grid
// (bootstrap refits start from the full-data optimum)
ScalingFit1D refine_collapse_1d(std::span<const ScalingPoint> points,
                                const ModelParams& params,
                                const CollapseOptions& options,
                                double exponent_a, double nu);

struct TrajectoryPoint {
  double size;
  double g;
  double time;
  double value;
};

// value = L^{-beta/nu} f(delta L^{1/nu}, ln(t/t0) L^{-b}), nu held fixed
struct ScalingFit2D {
  double beta = 0.0;
  double b = 0.5;
  double t0 = 1.0;
  double nu = 1.0;
  double objective = 0.0;
  bool unidentifiable = false;
  bool t0_at_boundary = false;
};

ScalingFit2D collapse_2d(std::span<const TrajectoryPoint> points, double nu,
                         const ModelParams& params,
                         const CollapseOptions& options = {});

double collapse_2d_objective(std::span<const TrajectoryPoint> points,
                             double nu, const ModelParams& params,
                             const CollapseOptions& options, double beta,
                             double b, double t0);

ScalingFit2D refine_collapse_2d(std::span<const TrajectoryPoint> points,
                                double nu, const ModelParams& params,
                                const CollapseOptions& options, double beta,
                                double b, double t0);

// collapsed coordinates of one row under a fitted form
struct CollapsedRow {
  double u;  // delta L^{1/nu}
  double w;  // ln(t/t0) L^{-b}, 0 for the one-variable form
  double z;  // rescaled observable
  double size;
  double g;
  double time;
};

std::vector<CollapsedRow> collapsed_coordinates(
    std::span<const ScalingPoint> points, const ModelParams& params,
    double g_critical, const ScalingFit1D& fit);

std::vector<CollapsedRow> collapsed_coordinates(
    std::span<const TrajectoryPoint> points, const ModelParams& params,
    double g_critical, const ScalingFit2D& fit);

// rows whose second scaling variable w falls inside [lo, hi]
std::vector<CollapsedRow> band_slice(std::span<const CollapsedRow> rows,
                                     double lo, double hi);

// ----------------------------------------------------------------- bootstrap

struct BootstrapSpec {
  int resamples = 500;
  std::uint64_t seed = 0x626f6f74;
  unsigned workers = 1;
};

// Draws with-replacement index resamples independently for every cell of
// disorder realizations and reports the standard deviation of the estimator
// across resamples. The estimator maps per-cell index draws to a parameter
// vector.
using CellDraws = std::vector<std::vector<std::size_t>>;
Eigen::VectorXd bootstrap_stddev(
    std::span<const std::size_t> cell_sizes, const BootstrapSpec& spec,
    const std::function<Eigen::VectorXd(const CellDraws&)>& estimator);

// ------------------------------------------------------- scaling composition

// Checks the activated form ln tau ~ xi^b with xi ~ delta^-nu: the relaxation
// time obeys ln tau ~ delta^(-nu*b), which matches exp(sqrt(delta^-nu)) only
// for b near 1/2.
struct CsdReport {
  double nu = 0.0;
  double b = 0.0;
  double b_error = 0.0;
  double nu_times_b = 0.0;
  bool consistent_with_sqrt = false;
};

CsdReport csd_consistency(const ScalingFit1D& fit_1d, const ScalingFit2D& fit_2d,
                          double b_error = 0.0);

}  // namespace ftc
