#include "ftc/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ftc/rng.hpp"

namespace ftc {

void ModelParams::validate() const {
  if (length < 2) throw std::invalid_argument("model: length must be >= 2");
  if (kick < 0.0 || kick > 1.0)
    throw std::invalid_argument("model: kick strength must lie in [0, 1]");
  if (t1 <= 0.0 || t2 <= 0.0)
    throw std::invalid_argument("model: time units must be positive");
  if (j_typical <= 0.0)
    throw std::invalid_argument("model: j_typical must be positive");
  if (sigma_j < 0.0)
    throw std::invalid_argument("model: sigma_j must be non-negative");
  if (window < 1) throw std::invalid_argument("model: window must be >= 1");
}

DisorderConfig sample_disorder(const ModelParams& params, std::uint64_t seed,
                               std::int64_t index, bool recenter) {
  params.validate();
  const int bonds = params.length - 1;
  const double mu = std::log(params.j_typical);

  Eigen::VectorXd logs(bonds);
  for (int j = 0; j < bonds; ++j) {
    logs[j] = mu + params.sigma_j *
                       counter_normal(seed, static_cast<std::uint64_t>(index),
                                      static_cast<std::uint64_t>(j), 0);
  }
  if (recenter && bonds > 0) logs.array() += mu - logs.mean();

  DisorderConfig config;
  config.couplings = logs.array().exp();
  config.seed = seed;
  config.index = index;
  return config;
}

double scaling_delta(double g, const ModelParams& params, DeltaForm form) {
  params.validate();
  if (g <= 0.0 || g >= 1.0) {
    if (form == DeltaForm::field || g <= 0.0)
      throw std::invalid_argument("scaling_delta: g must lie in (0, 1)");
  }
  const double scale =
      (form == DeltaForm::field) ? 0.5 * kPi * (1.0 - g) : 0.5 * kPi * g;
  return (std::log(scale) - std::log(params.j_typical)) /
         (params.sigma_j * params.sigma_j);
}

double scaling_delta_from(double g, double g_critical,
                          const ModelParams& params) {
  params.validate();
  if (g <= 0.0 || g >= 1.0 || g_critical <= 0.0 || g_critical >= 1.0)
    throw std::invalid_argument("scaling_delta: g must lie in (0, 1)");
  return (std::log(1.0 - g) - std::log(1.0 - g_critical)) /
         (params.sigma_j * params.sigma_j);
}

}  // namespace ftc
