#include <doctest.h>

#include <cmath>

#include "wienerlab/errors.hpp"
#include "wienerlab/moments.hpp"
#include "wienerlab/system.hpp"

using namespace wienerlab;

TEST_CASE("linear output") {
  const std::vector<double> ones(5, 1.0);
  for (std::size_t t = 1; t <= 5; ++t) CHECK(linear_output(std::vector<double>{0.8}, ones, t) == 0.8);
  CHECK(linear_output(std::vector<double>{1, 2}, std::vector<double>{1, 0, 0}, 2) == 2.0);
  CHECK(linear_output(std::vector<double>{0.5}, std::vector<double>{4}, 1) == 2.0);
  CHECK(linear_output(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 1}, 1) == 1.0);
  CHECK_THROWS_AS(linear_output(std::vector<double>{1}, ones, 0), InvalidArgument);
  CHECK_THROWS_AS(linear_output(std::vector<double>{1}, ones, 6), InvalidArgument);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS((WienerModel{{}, PolynomialSensor::cubic(), 1, 1}.validate()), InvalidArgument);
  CHECK_THROWS_AS((WienerModel{{1}, PolynomialSensor::cubic(), -1, 1}.validate()), InvalidArgument);
  CHECK_THROWS_AS((Dataset{{1, 2}, {1}, {}}.validate()), InvalidArgument);
}

TEST_CASE("noiseless simulation") {
  const auto u = constant_input(50);
  const auto lin = simulate(WienerModel{{1}, PolynomialSensor::linear(1), 0, 0}, u, 1);
  for (double y : lin.y) CHECK(y == 1.0);
  const auto quad = simulate(WienerModel{{1}, PolynomialSensor::quadratic(), 0, 0}, u, 1);
  for (double y : quad.y) CHECK(y == 0.5);
  CHECK(quad.seed == 1u);
}

TEST_CASE("simulation is seed-deterministic") {
  const WienerModel m{{1, -0.3}, PolynomialSensor::cubic(), 0.4, 0.2};
  const std::vector<double> u{1, 2, 0, -1, 3, 0.5};
  const auto a = simulate(m, u, 42), b = simulate(m, u, 42), c = simulate(m, u, 43);
  CHECK(a.y == b.y);
  CHECK(a.y != c.y);
}

TEST_CASE("simulated moments match the predictor") {
  constexpr std::size_t n = 1'000'000;
  {
    const auto d = simulate(WienerModel{{0}, PolynomialSensor::quadratic(), 1, 0}, constant_input(n, 0.0), 9);
    double s = 0;
    for (double y : d.y) s += y;
    CHECK(std::abs(s / n - 0.5) <= 0.005);
  }
  const WienerModel m{{0.8}, PolynomialSensor::cubic(), 0.3, 0.2};
  const auto d = simulate(m, constant_input(n), 10);
  double s = 0, ss = 0;
  for (double y : d.y) s += y;
  const double mean = s / n;
  for (double y : d.y) ss += (y - mean) * (y - mean);
  const double var = ss / (n - 1);
  const MomentReport mr = fourth_and_kappa(m, 0.8);
  CHECK(std::abs(mean - mr.mean) <= 3.0 * std::sqrt(mr.variance / n));
  // Standard error of a sample variance: √((μ4 - C^2)/n) = √(D/n).
  CHECK(std::abs(var - mr.variance) <= 3.0 * std::sqrt(mr.fourth / n));
}
