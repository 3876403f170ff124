#include "wienerlab/system.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "wienerlab/errors.hpp"

namespace wienerlab {

void WienerModel::validate() const {
  if (theta.empty()) throw InvalidArgument("system", "model needs at least one FIR coefficient");
  if (!(var_v >= 0.0) || !(var_e >= 0.0)) {
    throw InvalidArgument("system", "noise variances must be non-negative");
  }
}

void Dataset::validate() const {
  if (u.size() != y.size()) {
    throw InvalidArgument("system", "input and output lengths differ");
  }
  if (y.empty()) throw InvalidArgument("system", "dataset is empty");
}

double linear_output(std::span<const double> theta, std::span<const double> u,
                     std::size_t t) {
  if (t < 1 || t > u.size()) {
    throw InvalidArgument("system", "sample index " + std::to_string(t) +
                                        " outside 1.." + std::to_string(u.size()));
  }
  double z = 0.0;
  const std::size_t taps = std::min(theta.size(), t);
  for (std::size_t k = 0; k < taps; ++k) z += theta[k] * u[t - 1 - k];
  return z;
}

double linear_output(const WienerModel& model, std::span<const double> u,
                     std::size_t t) {
  return linear_output(model.theta, u, t);
}

std::vector<double> linear_outputs(std::span<const double> theta,
                                   std::span<const double> u) {
  std::vector<double> z(u.size());
  for (std::size_t t = 1; t <= u.size(); ++t) z[t - 1] = linear_output(theta, u, t);
  return z;
}

Dataset simulate(const WienerModel& model, std::span<const double> u,
                 std::uint64_t seed) {
  model.validate();
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd_v = std::sqrt(model.var_v);
  const double sd_e = std::sqrt(model.var_e);

  Dataset data;
  data.u.assign(u.begin(), u.end());
  data.y.resize(u.size());
  data.seed = seed;
  const std::vector<double> z = linear_outputs(model.theta, u);
  for (std::size_t t = 0; t < u.size(); ++t) {
    const double v = normal(engine);
    const double e = normal(engine);
    data.y[t] = model.sensor.eval(z[t] + sd_v * v) + sd_e * e;
  }
  return data;
}

std::vector<double> constant_input(std::size_t n, double value) {
  return std::vector<double>(n, value);
}

}  // namespace wienerlab
