#include "ftc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ftc/parallel.hpp"
#include "ftc/rng.hpp"

namespace ftc {

namespace {

// ---------------------------------------------------------------------- fit

void residual_jacobian(const Eigen::Vector3d& theta, std::span<const double> t,
                       std::span<const double> y, Eigen::VectorXd& r,
                       Eigen::MatrixXd& j) {
  const double a1 = theta[0], tau = theta[1], a2 = theta[2];
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = std::exp(-t[i] / tau);
    r[static_cast<Eigen::Index>(i)] = a1 * e + a2 - y[i];
    j(static_cast<Eigen::Index>(i), 0) = e;
    j(static_cast<Eigen::Index>(i), 1) = a1 * e * t[i] / (tau * tau);
    j(static_cast<Eigen::Index>(i), 2) = 1.0;
  }
}

// ------------------------------------------------------------- local fits

double tricube(double x) {
  if (x >= 1.0) return 0.0;
  const double c = 1.0 - x * x * x;
  return c * c * c;
}

// bandwidth covering `neighbors` distinct distances, slightly padded so the
// outermost one still carries weight
double neighbor_bandwidth(std::vector<double>& distances, int neighbors) {
  std::sort(distances.begin(), distances.end());
  double last = -1.0;
  int seen = 0;
  double width = 0.0;
  for (double d : distances) {
    if (d != last) {
      last = d;
      width = d;
      if (++seen >= neighbors) break;
    }
  }
  return 1.25 * std::max(width, 1e-300);
}

struct Master1D {
  const std::vector<double>& u;
  const std::vector<double>& v;
  const std::vector<int>& size_id;
  int neighbors;

  // normalized residual variance of each point against the local linear fit
  // through the points of the other system sizes
  double objective() const {
    const std::size_t n = u.size();
    double residual = 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    std::vector<double> dist;
    dist.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      dist.clear();
      for (std::size_t k = 0; k < n; ++k)
        if (size_id[k] != size_id[i]) dist.push_back(std::abs(u[k] - u[i]));
      if (dist.size() < 2) return std::numeric_limits<double>::infinity();
      const double h = neighbor_bandwidth(dist, neighbors);
      double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (size_id[k] == size_id[i]) continue;
        const double du = u[k] - u[i];
        const double w = tricube(std::abs(du) / h);
        if (w == 0.0) continue;
        s0 += w;
        s1 += w * du;
        s2 += w * du * du;
        t0 += w * v[k];
        t1 += w * v[k] * du;
      }
      const double denom = s0 * s2 - s1 * s1;
      const double predicted =
          (std::abs(denom) > 1e-300) ? (s2 * t0 - s1 * t1) / denom : t0 / s0;
      residual += (v[i] - predicted) * (v[i] - predicted);
    }
    double variance = 0.0;
    for (double x : v) variance += (x - mean) * (x - mean);
    if (variance <= 0.0) return 0.0;
    return residual / variance;
  }
};

struct Master2D {
  const std::vector<double>& u;
  const std::vector<double>& w;
  const std::vector<double>& z;
  const std::vector<int>& size_id;
  int neighbors;

  double objective() const {
    const std::size_t n = u.size();
    double umin = u[0], umax = u[0], wmin = w[0], wmax = w[0];
    for (std::size_t i = 1; i < n; ++i) {
      umin = std::min(umin, u[i]);
      umax = std::max(umax, u[i]);
      wmin = std::min(wmin, w[i]);
      wmax = std::max(wmax, w[i]);
    }
    const double su = std::max(umax - umin, 1e-12);
    const double sw = std::max(wmax - wmin, 1e-12);

    double mean = 0.0;
    for (double x : z) mean += x;
    mean /= static_cast<double>(n);

    double residual = 0.0;
    std::vector<double> dist;
    dist.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      dist.clear();
      for (std::size_t k = 0; k < n; ++k) {
        if (size_id[k] == size_id[i]) continue;
        const double du = (u[k] - u[i]) / su;
        const double dw = (w[k] - w[i]) / sw;
        dist.push_back(std::sqrt(du * du + dw * dw));
      }
      if (dist.size() < 3) return std::numeric_limits<double>::infinity();
      const double h = neighbor_bandwidth(dist, neighbors);

      Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
      Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
      for (std::size_t k = 0; k < n; ++k) {
        if (size_id[k] == size_id[i]) continue;
        const double du = (u[k] - u[i]) / su;
        const double dw = (w[k] - w[i]) / sw;
        const double weight = tricube(std::sqrt(du * du + dw * dw) / h);
        if (weight == 0.0) continue;
        const Eigen::Vector3d row(1.0, du, dw);
        normal += weight * row * row.transpose();
        rhs += weight * z[k] * row;
      }
      double predicted;
      Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
      if (lu.isInvertible()) {
        predicted = lu.solve(rhs)[0];
      } else if (normal(0, 0) > 0.0) {
        predicted = rhs[0] / normal(0, 0);
      } else {
        return std::numeric_limits<double>::infinity();
      }
      residual += (z[i] - predicted) * (z[i] - predicted);
    }
    double variance = 0.0;
    for (double x : z) variance += (x - mean) * (x - mean);
    if (variance <= 0.0) return 0.0;
    return residual / variance;
  }
};

// ------------------------------------------------------------- nelder-mead

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& start,
                            const Eigen::VectorXd& step, int max_iter,
                            double tol) {
  const Eigen::Index dim = start.size();
  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> value;
  simplex.push_back(start);
  value.push_back(f(start));
  for (Eigen::Index d = 0; d < dim; ++d) {
    Eigen::VectorXd x = start;
    x[d] += step[d];
    simplex.push_back(x);
    value.push_back(f(x));
  }

  auto order = [&] {
    for (std::size_t a = 0; a < simplex.size(); ++a)
      for (std::size_t b = a + 1; b < simplex.size(); ++b)
        if (value[b] < value[a]) {
          std::swap(value[a], value[b]);
          std::swap(simplex[a], simplex[b]);
        }
  };
  order();

  for (int it = 0; it < max_iter; ++it) {
    const std::size_t worst = simplex.size() - 1;
    if (std::abs(value[worst] - value[0]) <=
        tol * (std::abs(value[0]) + tol))
      break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t a = 0; a < worst; ++a) centroid += simplex[a];
    centroid /= static_cast<double>(worst);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    if (fr < value[0]) {
      const Eigen::VectorXd expanded =
          centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
    } else if (fr < value[worst - 1]) {
      simplex[worst] = reflected;
      value[worst] = fr;
    } else {
      const Eigen::VectorXd contracted =
          centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = f(contracted);
      if (fc < value[worst]) {
        simplex[worst] = contracted;
        value[worst] = fc;
      } else {
        for (std::size_t a = 1; a < simplex.size(); ++a) {
          simplex[a] = simplex[0] + 0.5 * (simplex[a] - simplex[0]);
          value[a] = f(simplex[a]);
        }
      }
    }
    order();
  }
  return simplex[0];
}

}  // namespace

RelaxationFit fit_relaxation(std::span<const double> t,
                             std::span<const double> values) {
  if (t.size() != values.size())
    throw std::invalid_argument("fit_relaxation: size mismatch");
  if (t.size() < 8)
    throw std::invalid_argument("fit_relaxation: need at least 8 points");
  for (double v : values)
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw std::invalid_argument("fit_relaxation: values must lie in [0, 1]");

  const std::size_t n = t.size();
  const double span = std::max(*std::max_element(t.begin(), t.end()) -
                                   *std::min_element(t.begin(), t.end()),
                               1.0);
  double tail = 0.0;
  const std::size_t quartile = std::max<std::size_t>(n / 4, 1);
  for (std::size_t i = n - quartile; i < n; ++i) tail += values[i];
  tail /= static_cast<double>(quartile);

  Eigen::Vector3d theta(values[0] - tail, span / 4.0, tail);
  Eigen::VectorXd r(n);
  Eigen::MatrixXd j(n, 3);
  residual_jacobian(theta, t, values, r, j);
  double sse = r.squaredNorm();

  RelaxationFit fit;
  double lambda = 1e-3;
  int it = 0;
  for (; it < 200; ++it) {
    const Eigen::Matrix3d jtj = j.transpose() * j;
    const Eigen::Vector3d g = j.transpose() * r;
    Eigen::Matrix3d damped = jtj;
    for (int d = 0; d < 3; ++d)
      damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
    const Eigen::Vector3d delta = damped.ldlt().solve(-g);
    const Eigen::Vector3d candidate = theta + delta;
    bool accepted = false;
    if (candidate[1] > 0.0) {
      Eigen::VectorXd rc(n);
      Eigen::MatrixXd jc(n, 3);
      residual_jacobian(candidate, t, values, rc, jc);
      const double sse_c = rc.squaredNorm();
      if (sse_c <= sse) {
        const double improvement = sse - sse_c;
        theta = candidate;
        r.swap(rc);
        j.swap(jc);
        sse = sse_c;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (improvement <= 1e-15 * (sse + 1e-15) &&
            delta.norm() <= 1e-12 * (theta.norm() + 1.0)) {
          fit.converged = true;
          ++it;
          break;
        }
      }
    }
    if (!accepted) {
      lambda *= 3.0;
      if (lambda > 1e12) {
        // no descent step exists; converged iff the gradient vanished
        fit.converged = g.norm() <= 1e-8 * (1.0 + sse);
        ++it;
        break;
      }
    }
  }

  fit.amplitude = theta[0];
  fit.tau = theta[1];
  fit.plateau = theta[2];
  fit.sse = sse;
  fit.iterations = it;
  fit.degenerate = std::abs(fit.amplitude) < 1e-3;
  return fit;
}

double collapse_1d_objective(std::span<const ScalingPoint> points,
                             const ModelParams& params,
                             const CollapseOptions& options, double exponent_a,
                             double nu) {
  if (nu <= 0.0) return std::numeric_limits<double>::infinity();
  const std::size_t n = points.size();
  std::vector<double> u(n), v(n);
  std::vector<int> size_id(n);
  std::vector<double> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    const double delta =
        scaling_delta_from(points[i].g, options.g_critical, params);
    u[i] = delta * std::pow(points[i].size, 1.0 / nu);
    v[i] = points[i].value * std::pow(points[i].size, exponent_a);
    auto it = std::find(sizes.begin(), sizes.end(), points[i].size);
    if (it == sizes.end()) {
      sizes.push_back(points[i].size);
      size_id[i] = static_cast<int>(sizes.size()) - 1;
    } else {
      size_id[i] = static_cast<int>(it - sizes.begin());
    }
  }
  return Master1D{u, v, size_id, options.neighbors}.objective();
}

ScalingFit1D collapse_1d(std::span<const ScalingPoint> points,
                         const ModelParams& params,
                         const CollapseOptions& options) {
  if (points.size() < 8)
    throw std::invalid_argument("collapse_1d: too few points");

  auto objective = [&](double a, double nu) {
    return collapse_1d_objective(points, params, options, a, nu);
  };

  double best_a = 0.0, best_nu = 1.0;
  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  for (int ia = 0; ia < options.grid; ++ia) {
    const double a = options.a_min + (options.a_max - options.a_min) * ia /
                                         (options.grid - 1);
    for (int in = 0; in < options.grid; ++in) {
      const double nu = options.nu_min + (options.nu_max - options.nu_min) *
                                             in / (options.grid - 1);
      const double value = objective(a, nu);
      if (!std::isfinite(value)) continue;
      if (value < best) {
        best = value;
        best_a = a;
        best_nu = nu;
      }
      worst = std::max(worst, value);
    }
  }
  if (!std::isfinite(best))
    throw std::invalid_argument("collapse_1d: objective undefined (need >= 2 sizes)");

  ScalingFit1D fit;
  fit.unidentifiable =
      (worst - best) <= options.flat_tol * std::max(worst, 1e-300);

  auto penalized = [&](const Eigen::VectorXd& x) {
    if (x[1] < options.nu_min || x[1] > options.nu_max ||
        x[0] < options.a_min || x[0] > options.a_max)
      return 1e30;
    return objective(x[0], x[1]);
  };
  Eigen::VectorXd start(2), step(2);
  start << best_a, best_nu;
  step << (options.a_max - options.a_min) / (options.grid - 1),
      (options.nu_max - options.nu_min) / (options.grid - 1);
  const Eigen::VectorXd optimum =
      nelder_mead(penalized, start, step, 400, 1e-10);
  fit.exponent_a = optimum[0];
  fit.nu = optimum[1];
  fit.objective = penalized(optimum);
  return fit;
}

ScalingFit1D refine_collapse_1d(std::span<const ScalingPoint> points,
                                const ModelParams& params,
                                const CollapseOptions& options,
                                double exponent_a, double nu) {
  auto penalized = [&](const Eigen::VectorXd& x) {
    if (x[1] < options.nu_min || x[1] > options.nu_max ||
        x[0] < options.a_min || x[0] > options.a_max)
      return 1e30;
    return collapse_1d_objective(points, params, options, x[0], x[1]);
  };
  Eigen::VectorXd start(2), step(2);
  start << exponent_a, nu;
  step << 0.02, 0.05;
  const Eigen::VectorXd optimum = nelder_mead(penalized, start, step, 250, 1e-9);
  ScalingFit1D fit;
  fit.exponent_a = optimum[0];
  fit.nu = optimum[1];
  fit.objective = penalized(optimum);
  return fit;
}

double collapse_2d_objective(std::span<const TrajectoryPoint> points,
                             double nu, const ModelParams& params,
                             const CollapseOptions& options, double beta,
                             double b, double t0) {
  if (t0 <= 0.0) return std::numeric_limits<double>::infinity();
  const std::size_t n = points.size();
  std::vector<double> u(n), w(n), z(n);
  std::vector<int> size_id(n);
  std::vector<double> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    const double delta =
        scaling_delta_from(points[i].g, options.g_critical, params);
    u[i] = delta * std::pow(points[i].size, 1.0 / nu);
    w[i] = std::log(points[i].time / t0) * std::pow(points[i].size, -b);
    z[i] = points[i].value * std::pow(points[i].size, beta / nu);
    auto it = std::find(sizes.begin(), sizes.end(), points[i].size);
    if (it == sizes.end()) {
      sizes.push_back(points[i].size);
      size_id[i] = static_cast<int>(sizes.size()) - 1;
    } else {
      size_id[i] = static_cast<int>(it - sizes.begin());
    }
  }
  return Master2D{u, w, z, size_id, options.neighbors + 2}.objective();
}

ScalingFit2D collapse_2d(std::span<const TrajectoryPoint> points, double nu,
                         const ModelParams& params,
                         const CollapseOptions& options) {
  if (points.size() < 12)
    throw std::invalid_argument("collapse_2d: too few points");
  if (nu <= 0.0) throw std::invalid_argument("collapse_2d: nu must be positive");

  double min_time = points[0].time;
  for (const auto& p : points) min_time = std::min(min_time, p.time);

  auto objective = [&](double beta, double b, double t0) {
    return collapse_2d_objective(points, nu, params, options, beta, b, t0);
  };

  // coarse grid, t0 scanned in log space
  const int g = std::max(5, options.grid / 3);
  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  double best_beta = 0, best_b = 0.5, best_lt = 0;
  const double lt_min = std::log(options.t0_min);
  const double lt_max = std::log(std::min(options.t0_max, min_time));
  for (int ib = 0; ib < g; ++ib) {
    const double beta =
        options.beta_min + (options.beta_max - options.beta_min) * ib / (g - 1);
    for (int ie = 0; ie < g; ++ie) {
      const double b =
          options.b_min + (options.b_max - options.b_min) * ie / (g - 1);
      for (int it = 0; it < g; ++it) {
        const double lt = lt_min + (lt_max - lt_min) * it / (g - 1);
        const double value = objective(beta, b, std::exp(lt));
        if (!std::isfinite(value)) continue;
        if (value < best) {
          best = value;
          best_beta = beta;
          best_b = b;
          best_lt = lt;
        }
        worst = std::max(worst, value);
      }
    }
  }
  if (!std::isfinite(best))
    throw std::invalid_argument("collapse_2d: objective undefined (need >= 2 sizes)");

  ScalingFit2D fit;
  fit.nu = nu;
  fit.unidentifiable =
      (worst - best) <= options.flat_tol * std::max(worst, 1e-300);

  auto penalized = [&](const Eigen::VectorXd& x) {
    if (x[0] < options.beta_min || x[0] > options.beta_max ||
        x[1] < options.b_min || x[1] > options.b_max || x[2] < lt_min - 2.0 ||
        x[2] > lt_max)
      return 1e30;
    return objective(x[0], x[1], std::exp(x[2]));
  };
  Eigen::VectorXd start(3), step(3);
  start << best_beta, best_b, best_lt;
  step << (options.beta_max - options.beta_min) / (g - 1),
      (options.b_max - options.b_min) / (g - 1), (lt_max - lt_min) / (g - 1);
  const Eigen::VectorXd optimum =
      nelder_mead(penalized, start, step, 500, 1e-10);
  fit.beta = optimum[0];
  fit.b = optimum[1];
  fit.t0 = std::exp(optimum[2]);
  fit.objective = penalized(optimum);
  fit.t0_at_boundary = (fit.t0 <= 0.1) || (fit.t0 >= min_time);
  return fit;
}

ScalingFit2D refine_collapse_2d(std::span<const TrajectoryPoint> points,
                                double nu, const ModelParams& params,
                                const CollapseOptions& options, double beta,
                                double b, double t0) {
  double min_time = points[0].time;
  for (const auto& p : points) min_time = std::min(min_time, p.time);
  const double lt_min = std::log(options.t0_min) - 2.0;
  const double lt_max = std::log(std::min(options.t0_max, min_time));
  auto penalized = [&](const Eigen::VectorXd& x) {
    if (x[0] < options.beta_min || x[0] > options.beta_max ||
        x[1] < options.b_min || x[1] > options.b_max || x[2] < lt_min ||
        x[2] > lt_max)
      return 1e30;
    return collapse_2d_objective(points, nu, params, options, x[0], x[1],
                                 std::exp(x[2]));
  };
  Eigen::VectorXd start(3), step(3);
  start << beta, b, std::log(t0);
  step << 0.03, 0.02, 0.05;
  const Eigen::VectorXd optimum = nelder_mead(penalized, start, step, 300, 1e-9);
  ScalingFit2D fit;
  fit.nu = nu;
  fit.beta = optimum[0];
  fit.b = optimum[1];
  fit.t0 = std::exp(optimum[2]);
  fit.objective = penalized(optimum);
  fit.t0_at_boundary = (fit.t0 <= 0.1) || (fit.t0 >= min_time);
  return fit;
}

std::vector<CollapsedRow> collapsed_coordinates(
    std::span<const ScalingPoint> points, const ModelParams& params,
    double g_critical, const ScalingFit1D& fit) {
  std::vector<CollapsedRow> rows;
  rows.reserve(points.size());
  for (const auto& p : points) {
    CollapsedRow row;
    row.u = scaling_delta_from(p.g, g_critical, params) *
            std::pow(p.size, 1.0 / fit.nu);
    row.w = 0.0;
    row.z = p.value * std::pow(p.size, fit.exponent_a);
    row.size = p.size;
    row.g = p.g;
    row.time = 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CollapsedRow> collapsed_coordinates(
    std::span<const TrajectoryPoint> points, const ModelParams& params,
    double g_critical, const ScalingFit2D& fit) {
  std::vector<CollapsedRow> rows;
  rows.reserve(points.size());
  for (const auto& p : points) {
    CollapsedRow row;
    row.u = scaling_delta_from(p.g, g_critical, params) *
            std::pow(p.size, 1.0 / fit.nu);
    row.w = std::log(p.time / fit.t0) * std::pow(p.size, -fit.b);
    row.z = p.value * std::pow(p.size, fit.beta / fit.nu);
    row.size = p.size;
    row.g = p.g;
    row.time = p.time;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CollapsedRow> band_slice(std::span<const CollapsedRow> rows,
                                     double lo, double hi) {
  std::vector<CollapsedRow> out;
  for (const auto& row : rows)
    if (row.w >= lo && row.w <= hi) out.push_back(row);
  return out;
}

Eigen::VectorXd bootstrap_stddev(
    std::span<const std::size_t> cell_sizes, const BootstrapSpec& spec,
    const std::function<Eigen::VectorXd(const CellDraws&)>& estimator) {
  if (spec.resamples < 20)
    throw std::invalid_argument("bootstrap: need at least 20 resamples");

  std::vector<Eigen::VectorXd> estimates(spec.resamples);
  parallel_for(
      static_cast<std::size_t>(spec.resamples),
      std::max(1u, spec.workers), [&](std::size_t r) {
        CellDraws draws(cell_sizes.size());
        for (std::size_t c = 0; c < cell_sizes.size(); ++c) {
          draws[c].resize(cell_sizes[c]);
          for (std::size_t k = 0; k < cell_sizes[c]; ++k)
            draws[c][k] = counter_index(spec.seed, r, c, k, cell_sizes[c]);
        }
        estimates[r] = estimator(draws);
      });

  const Eigen::Index dim = estimates[0].size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& e : estimates) mean += e;
  mean /= static_cast<double>(spec.resamples);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& e : estimates)
    var += (e - mean).cwiseProduct(e - mean);
  var /= static_cast<double>(spec.resamples - 1);
  return var.cwiseSqrt();
}

CsdReport csd_consistency(const ScalingFit1D& fit_1d,
                          const ScalingFit2D& fit_2d, double b_error) {
  CsdReport report;
  report.nu = fit_1d.nu;
  report.b = fit_2d.b;
  report.b_error = b_error;
  report.nu_times_b = fit_1d.nu * fit_2d.b;
  report.consistent_with_sqrt =
      std::abs(fit_2d.b - 0.5) <= std::max(2.0 * b_error, 0.1);
  return report;
}

}  // namespace ftc
