#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/moments.hpp"
#include "wienerlab/quadrature.hpp"

using namespace wienerlab;

TEST_CASE("one and two point rules") {
  const auto r1 = hermite_rule(1);
  REQUIRE(r1.nodes.size() == 1);
  CHECK(r1.nodes[0] == 0.0);
  CHECK(r1.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));

  const auto r2 = hermite_rule(2);
  CHECK(r2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(r2.nodes[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(r2.weights[0] == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-15));
  CHECK(r2.weights[1] == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-15));
}

TEST_CASE("three point rule integrates x^4") {
  const auto r = hermite_rule(3);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += r.weights[i] * std::pow(r.nodes[i], 4);
  CHECK(s == doctest::Approx(0.75 * std::sqrt(std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("invalid orders") {
  CHECK_THROWS_AS(hermite_rule(0), InvalidArgument);
  CHECK_THROWS_AS(hermite_rule(-3), InvalidArgument);
  CHECK_THROWS_AS(hermite_rule(kMaxHermiteOrder + 1), InvalidArgument);
}

TEST_CASE("rule invariants across orders") {
  for (int n : {1, 2, 5, 17, 64, 100, 150, 300, 500}) {
    CAPTURE(n);
    const auto r = hermite_rule(n);
    REQUIRE(static_cast<int>(r.nodes.size()) == n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
      CHECK(std::abs(r.nodes[i] + r.nodes[n - 1 - i]) <= 1e-12);
      CHECK(r.weights[i] == r.weights[n - 1 - i]);
      CHECK(std::isfinite(r.log_weights[i]));
      // Below ~1e-308 a weight is not representable; its log still is.
      if (n <= 300) CHECK(r.weights[i] > 0.0);
      sum += r.weights[i];
    }
    CHECK(std::abs(sum - std::sqrt(std::numbers::pi)) <= 1e-10);
  }
}

TEST_CASE("high orders keep finite log weights") {
  const auto r = hermite_rule(kMaxHermiteOrder);
  double sum = 0.0;
  for (int i = 0; i < r.order; ++i) {
    REQUIRE(std::isfinite(r.log_weights[i]));
    CHECK(r.weights[i] >= 0.0);
    sum += std::exp(r.log_weights[i]);
  }
  CHECK(std::abs(sum - std::sqrt(std::numbers::pi)) <= 1e-10);
  // Largest node of H_n grows like √(2n).
  CHECK(r.nodes.back() < std::sqrt(2.0 * r.order + 1.0));
  CHECK(r.nodes.back() > std::sqrt(2.0 * r.order) - 3.0);
}

TEST_CASE("exactness up to degree 2n-1 for n <= 64") {
  for (int n = 1; n <= 64; ++n) {
    const auto r = hermite_rule(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      long double s = 0.0L;
      for (int i = 0; i < n; ++i) s += static_cast<long double>(r.weights[i]) * std::pow((long double)r.nodes[i], k);
      const double exact = oracle::hermite_moment(k);
      if (exact == 0.0) {
        // Odd moments cancel exactly by symmetry of the rule.
        CHECK(std::abs(static_cast<double>(s)) <= 1e-9 * std::tgamma(0.5 * (k + 2)));
      } else {
        CHECK(std::abs(static_cast<double>(s) - exact) <= 1e-9 * exact);
      }
    }
  }
}

TEST_CASE("expect_gaussian examples") {
  const auto r2 = hermite_rule(2);
  CHECK(expect_gaussian([](double x) { return x * x; }, 0.0, 1.0, r2) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(expect_gaussian([](double x) { return x * x * x / 3.0; }, 1.0, 1.0, r2) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  const auto r20 = hermite_rule(20);
  CHECK(std::abs(expect_gaussian([](double x) { return std::exp(x); }, 0.0, 1.0, r20) -
                 std::exp(0.5)) <= 1e-6);
  CHECK(expect_gaussian([](double x) { return std::cos(x) + 7.0; }, 0.3, 0.0, r20) ==
        std::cos(0.3) + 7.0);
  CHECK_THROWS_AS(expect_gaussian([](double x) { return x; }, 0.0, -1.0, r2), InvalidArgument);
}

TEST_CASE("expect_gaussian2 examples") {
  const auto r = hermite_rule(4);
  CHECK(std::abs(expect_gaussian2([](double v, double e) { return v * e; }, 0, 0.7, 0, 3.1, r)) <= 1e-14);
  CHECK(expect_gaussian2([](double v, double e) { return (v + e) * (v + e); }, 0, 0.5, 0, 0.5, r) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(expect_gaussian2([](double v, double e) { return v * v * e * e; }, 0, 1.0, 0, 2.0, hermite_rule(2)) ==
        doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(expect_gaussian2([](double, double) { return 0.0; }, 0, 1, 0, -1, r), InvalidArgument);
}

TEST_CASE("polynomial expectations agree with closed-form moments") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mean(-5, 5), var(0, 4), coef(-2, 2);
  const auto rule = hermite_rule(kDefaultMomentOrder);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<long double> p(6);
    std::vector<double> pd(6);
    for (int j = 0; j < 6; ++j) pd[j] = static_cast<double>(p[j] = coef(rng));
    const double m = mean(rng), s2 = var(rng);
    const double quad = expect_gaussian([&](double x) { return static_cast<double>(oracle::poly(pd, x)); }, m, s2, rule);
    // Shift the polynomial to the mean and take the Gaussian moments.
    std::vector<long double> shifted(6, 0.0L);
    for (int j = 0; j < 6; ++j) {
      long double binom = 1.0L;
      for (int i = 0; i <= j; ++i) {
        shifted[i] += p[j] * binom * std::pow((long double)m, j - i);
        binom = binom * (j - i) / (i + 1);
      }
    }
    const double closed = static_cast<double>(gaussian_expectation(shifted, s2));
    CHECK(std::abs(quad - closed) <= 1e-10 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("scaling invariance") {
  const auto rule = hermite_rule(30);
  const auto f = [](double x) { return std::sin(x) + x * x; };
  const double m = 0.7, s2 = 2.3, s = std::sqrt(s2);
  CHECK(expect_gaussian(f, m, s2, rule) ==
        doctest::Approx(expect_gaussian([&](double t) { return f(m + s * t); }, 0.0, 1.0, rule)).epsilon(1e-13));
}
