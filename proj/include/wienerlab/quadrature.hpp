#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wienerlab/errors.hpp"

namespace wienerlab {

/**
 * Gauss-Hermite rule for the weight e^{-x^2}:
 *
 *     ∫ g(x) e^{-x^2} dx ≈ Σ_i w_i g(x_i),
 *
 * exact for polynomials g of degree ≤ 2n-1. Nodes are ascending and exactly
 * antisymmetric; weights are exactly symmetric.
 *
 * `log_weights` is the authoritative representation. Beyond order ~350 the
 * outermost weights fall below the smallest double and `weights` stores 0 for
 * them, while `log_weights` stays finite. Likelihood code works in log space
 * and never needs the underflowed values.
 */
struct QuadratureRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> log_weights;
};

inline constexpr int kMaxHermiteOrder = 10000;
inline constexpr int kDefaultLikelihoodOrder = 1000;
inline constexpr int kDefaultMomentOrder = 40;

// Golub-Welsch eigenvalues of the Jacobi matrix, polished by Newton steps on
// the orthonormal recurrence; weights from the Christoffel identity
// w_i = 1 / (n p_{n-1}(x_i)^2), evaluated in log space.
QuadratureRule hermite_rule(int order);

namespace detail {
inline void check_variance(double variance) {
  if (!(variance >= 0.0)) {
    throw InvalidArgument("quadrature", "variance must be non-negative");
  }
}
}  // namespace detail

// E{f(X)}, X ~ Normal(mean, variance). Exact for polynomial f of degree
// ≤ 2n-1; returns f(mean) when the variance is zero.
template <class F>
double expect_gaussian(F&& f, double mean, double variance,
                       const QuadratureRule& rule) {
  detail::check_variance(variance);
  if (variance == 0.0) return f(mean);
  const double scale = std::sqrt(2.0 * variance);
  double sum = 0.0;
  for (int i = 0; i < rule.order; ++i) {
    const double w = rule.weights[i];
    if (w == 0.0) continue;
    sum += w * f(mean + scale * rule.nodes[i]);
  }
  return sum * std::numbers::inv_sqrtpi;
}

// Tensor-product expectation E{f(V, E)} for independent Gaussians.
template <class F>
double expect_gaussian2(F&& f, double mean1, double var1, double mean2,
                        double var2, const QuadratureRule& rule) {
  detail::check_variance(var1);
  detail::check_variance(var2);
  return expect_gaussian(
      [&](double a) {
        return expect_gaussian([&](double b) { return f(a, b); }, mean2, var2,
                               rule);
      },
      mean1, var1, rule);
}

}  // namespace wienerlab
