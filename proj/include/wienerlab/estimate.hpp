#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wienerlab/kernels.hpp"
#include "wienerlab/likelihood.hpp"
#include "wienerlab/system.hpp"

namespace wienerlab {

struct ScalarMinimum {
  double argmin = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Brent's method: golden-section steps with successive parabolic
// interpolation. Only evaluates f inside [lower, upper]. A constant f returns
// the bracket midpoint. Non-finite values raise EvaluationError.
ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lower,
                              double upper, double tol = 1e-8, int max_iter = 500);

struct SimplexMinimum {
  std::vector<double> argmin;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double spread = 0.0;  // max - min cost over the final simplex
};

// Nelder-Mead with reflection 1, expansion 2, contraction 1/2, shrink 1/2.
// Stops when the cost spread over the simplex falls below tol.
SimplexMinimum minimize_simplex(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x0, double scale = 0.1,
                                double tol = 1e-10, int max_iter = 0);

enum class Method { exact_ml, gauss1, gauss2, cmp };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

struct FitOptions {
  // Scalar θ restricted to [positive_floor, upper].
  bool positive = false;
  double positive_floor = 1e-6;
  std::optional<double> upper;
  // Half-width of the symmetric scalar bracket; default 5·max(1, |θ_init|).
  std::optional<double> half_width;
  std::optional<std::vector<double>> initial;
  int gh_order = kDefaultLikelihoodOrder;
  double scalar_tol = 1e-8;
  double simplex_tol = 1e-10;
  int max_iter = 0;  // 0: 2000·m
  Execution exec = Execution::parallel;
};

struct EstimateResult {
  std::vector<double> theta_hat;
  double cost = 0.0;
  Method method = Method::cmp;
  int iterations = 0;
  bool converged = false;
  // Scalar fits: final bracket. Vector fits: final simplex cost spread.
  std::optional<Interval> bracket;
  std::optional<double> simplex_spread;
};

// Cost of θ for the chosen method on (u, y); template's sensor and noise
// variances are fixed.
double method_cost(Method method, const WienerModel& model_template,
                   std::span<const double> theta, std::span<const double> u,
                   std::span<const double> y, const QuadratureRule* rule,
                   Execution exec = Execution::parallel);

// Initial θ: FIR least squares on h^{-1}(y_t) when the sensor is invertible
// over the observed outputs, otherwise the template θ.
std::vector<double> initial_theta(const WienerModel& model_template,
                                  std::span<const double> u, std::span<const double> y);

// Exact ML is seeded by the CMP estimate. Non-convergence is reported in the
// result, not thrown.
EstimateResult fit(const Dataset& data, const WienerModel& model_template, Method method,
                   const FitOptions& options = {});

}  // namespace wienerlab
