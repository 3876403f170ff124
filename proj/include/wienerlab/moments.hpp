#pragma once

#include <vector>

#include "wienerlab/quadrature.hpp"
#include "wienerlab/system.hpp"

namespace wienerlab {

// Output statistics of y = h(z + v) + e at a fixed linear output z.
struct MomentReport {
  double mean = 0.0;      // ŷ = E{h(z + v)}
  double variance = 0.0;  // C = Var{h(z + v) + e}
  double third = 0.0;     // E{(y - ŷ)^3}
  double fourth = 0.0;    // D = E{[(y - ŷ)^2 - C]^2}
  double kappa = 0.0;     // D / (2 C^2); kurtosis is 2κ + 1
};

// Which residual the kurtosis factor is taken from.
enum class KappaSource {
  true_residual,   // h(z+v) - ŷ + e
  model_residual,  // h'(z) v + h''(z)(v^2 - σ_v^2)/2 + e, the second-order model
};

// E{v^k} for v ~ Normal(0, variance): (k-1)!! variance^{k/2} for even k, else 0.
long double gaussian_moment(int k, long double variance);

// E{p(v)} for a polynomial p in v ~ Normal(0, variance), accumulated in long
// double.
long double gaussian_expectation(const std::vector<long double>& poly,
                                 long double variance);

double predictor_mean(const WienerModel& model, double z);
double predictor_variance(const WienerModel& model, double z);

// Conditional mean and variance together with their z-derivatives.
struct PredictorSlope {
  double mean = 0.0;
  double dmean = 0.0;
  double variance = 0.0;
  double dvariance = 0.0;
};
PredictorSlope predictor_with_slope(const WienerModel& model, double z);

// Closed form. Throws DegenerateDistribution when C = 0.
MomentReport fourth_and_kappa(const WienerModel& model, double z,
                              KappaSource source = KappaSource::true_residual);

// Same quantities by (nested) Gauss-Hermite quadrature; the independent
// check of the closed form.
MomentReport moments_by_quadrature(const WienerModel& model, double z,
                                   const QuadratureRule& rule);

}  // namespace wienerlab
