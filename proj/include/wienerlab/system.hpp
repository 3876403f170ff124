#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wienerlab/sensor.hpp"

namespace wienerlab {

// z_t = G(q, θ) u_t + v_t,  y_t = h(z_t) + e_t  with FIR G(q, θ) = Σ_k θ_k q^{-k}.
struct WienerModel {
  std::vector<double> theta;
  PolynomialSensor sensor;
  double var_v = 0.0;
  double var_e = 0.0;

  // Throws InvalidArgument on negative variances or an empty θ.
  void validate() const;
};

struct Dataset {
  std::vector<double> u;
  std::vector<double> y;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return y.size(); }
  void validate() const;
};

// z_t = Σ_{k<nb} θ_k u_{t-k} with zero initial conditions, t is 1-based.
double linear_output(std::span<const double> theta, std::span<const double> u,
                     std::size_t t);
double linear_output(const WienerModel& model, std::span<const double> u,
                     std::size_t t);

// All of z_1..z_N.
std::vector<double> linear_outputs(std::span<const double> theta,
                                   std::span<const double> u);

// Noise is drawn from std::mt19937_64 seeded with `seed` through
// std::normal_distribution<double>, interleaved as v_1, e_1, v_2, e_2, ...
// Draws happen even for zero variances so the stream layout never depends
// on the model. Bit-identical for identical (model, u, seed) within a build.
Dataset simulate(const WienerModel& model, std::span<const double> u,
                 std::uint64_t seed);

std::vector<double> constant_input(std::size_t n, double value = 1.0);

}  // namespace wienerlab
