#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/sensor.hpp"

using namespace wienerlab;

TEST_CASE("derivatives of the built-in sensors") {
  const auto q = PolynomialSensor::quadratic();
  CHECK(q.eval(2.0, 0) == 2.0);
  CHECK(q.eval(2.0, 1) == 2.0);
  CHECK(q.eval(2.0, 2) == 1.0);
  CHECK(q.eval(2.0, 3) == 0.0);
  CHECK(PolynomialSensor::cubic().eval(1.0, 1) == 1.0);
  const auto lin = PolynomialSensor::linear(3.0);
  CHECK(lin.eval(-1.0, 0) == -3.0);
  CHECK(lin.eval(-1.0, 1) == 3.0);
  CHECK_THROWS_AS(q.eval(1.0, 4), InvalidArgument);
  CHECK_THROWS_AS(q.eval(1.0, -1), InvalidArgument);
}

TEST_CASE("degree follows the last nonzero coefficient") {
  CHECK(PolynomialSensor({1.0, 2.0, 0.0, 0.0}).degree() == 1);
  CHECK(PolynomialSensor({0.0, 0.0}).degree() == 0);
  CHECK(PolynomialSensor::cubic().degree() == 3);
  CHECK_THROWS_AS(PolynomialSensor(std::vector<double>(10, 1.0)), InvalidArgument);
  const PolynomialSensor p({1, 2, 3});
  for (int k = 3; k <= 6; ++k) CHECK(p.derivative_at(0.7, k) == 0.0);
}

TEST_CASE("inverse examples") {
  CHECK(PolynomialSensor::cubic().inverse(9.0, {0, 10}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(PolynomialSensor::linear(2.0).inverse(5.0, {-10, 10}) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(PolynomialSensor::quadratic().inverse(0.25, {-1, 1}), NonInvertible);
  CHECK_THROWS_AS(PolynomialSensor::cubic().inverse(1e6, {-2, 2}), OutOfRange);
  // Monotone with a stationary point at 0 is still invertible.
  CHECK(PolynomialSensor::cubic().inverse(0.0, {-1, 1}) == 0.0);
}

TEST_CASE("inverse round trip") {
  std::mt19937_64 rng(3);
  const PolynomialSensor h({0.3, 1.0, 0.2, 0.5});  // h' = 1 + 0.4x + 1.5x^2 > 0
  const Interval b{-4, 4};
  REQUIRE(h.is_strictly_monotone(b));
  std::uniform_real_distribution<double> x(b.lower, b.upper);
  for (int i = 0; i < 1000; ++i) {
    const double x0 = x(rng);
    const double y = h.eval(x0);
    const double xi = h.inverse(y, b);
    CHECK(std::abs(xi - x0) <= 1e-10);
    CHECK(std::abs(h.eval(xi) - y) <= 1e-12 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("derivatives match finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-2, 2), x(-3, 3);
  std::uniform_int_distribution<int> deg(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> coeffs(deg(rng) + 1);
    for (auto& v : coeffs) v = c(rng);
    const PolynomialSensor h(coeffs);
    const double x0 = x(rng);
    for (int k = 1; k <= 3; ++k) {
      const double step = 1e-5;
      const double fd = (h.eval(x0 + step, k - 1) - h.eval(x0 - step, k - 1)) / (2 * step);
      const double an = h.eval(x0, k);
      CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("monotonicity test") {
  CHECK(PolynomialSensor::cubic().is_strictly_monotone({-5, 5}));
  CHECK_FALSE(PolynomialSensor::quadratic().is_strictly_monotone({-1, 1}));
  CHECK(PolynomialSensor::quadratic().is_strictly_monotone({0, 3}));
  CHECK_FALSE(PolynomialSensor({0.0}).is_strictly_monotone({-1, 1}));
  // h' = x^2 - 0.01 changes sign twice within a single grid cell of [-100, 100].
  CHECK_FALSE(PolynomialSensor({0, -0.01, 0, 1.0 / 3.0}).is_strictly_monotone({-100, 100}));
}

TEST_CASE("real roots") {
  const auto r = real_roots({-6, 11, -6, 1}, {-10, 10});  // (x-1)(x-2)(x-3)
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(r[2] == doctest::Approx(3.0));
  CHECK(real_roots({1, 0, 1}, {-10, 10}).empty());
}
