#include "wienerlab/moments.hpp"

#include <algorithm>
#include <cmath>

#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {

using Poly = std::vector<long double>;

Poly multiply(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0L) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly to_long(const std::vector<double>& c) { return Poly(c.begin(), c.end()); }

// h(z + v) as a polynomial in v.
Poly shifted_sensor(const PolynomialSensor& sensor, double z) {
  return to_long(sensor.shifted(z));
}

struct ResidualStats {
  long double second;  // E r^2
  long double third;   // E r^3; e is symmetric and adds nothing
  long double fourth;  // D
};

// For a zero-mean residual polynomial r(v) plus independent e ~ N(0, var_e):
//   C = E r^2 + σ_e^2,  D = Var(r^2) + 4 σ_e^2 E r^2 + 2 σ_e^4.
ResidualStats residual_stats(const Poly& r, long double var_v, long double var_e) {
  const Poly r2 = multiply(r, r);
  const long double second = gaussian_expectation(r2, var_v);
  Poly centred = r2;
  centred[0] -= second;
  const long double var_r2 = gaussian_expectation(multiply(centred, centred), var_v);
  const long double d = var_r2 + 4.0L * var_e * second + 2.0L * var_e * var_e;
  const long double third = gaussian_expectation(multiply(r2, r), var_v);
  return {second, third, d};
}

MomentReport finish(long double mean, const ResidualStats& s, long double var_e) {
  const long double second = s.second;
  const long double d = s.fourth;
  const long double c = second + var_e;
  if (!(c > 0.0L)) {
    throw DegenerateDistribution("moments", "output variance is zero; kappa undefined");
  }
  MomentReport rep;
  rep.mean = static_cast<double>(mean);
  rep.variance = static_cast<double>(c);
  rep.third = static_cast<double>(s.third);
  rep.fourth = static_cast<double>(std::max(d, 0.0L));
  rep.kappa = static_cast<double>(std::max(d, 0.0L) / (2.0L * c * c));
  return rep;
}

}  // namespace

long double gaussian_moment(int k, long double variance) {
  if (k < 0) throw InvalidArgument("moments", "negative moment order");
  if (k % 2 == 1) return 0.0L;
  long double m = 1.0L;
  for (int j = k - 1; j > 0; j -= 2) m *= static_cast<long double>(j) * variance;
  return m;
}

long double gaussian_expectation(const Poly& poly, long double variance) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < poly.size(); k += 2) {
    acc += poly[k] * gaussian_moment(static_cast<int>(k), variance);
  }
  return acc;
}

double predictor_mean(const WienerModel& model, double z) {
  return static_cast<double>(
      gaussian_expectation(shifted_sensor(model.sensor, z), model.var_v));
}

double predictor_variance(const WienerModel& model, double z) {
  Poly r = shifted_sensor(model.sensor, z);
  r[0] -= gaussian_expectation(r, model.var_v);
  return static_cast<double>(gaussian_expectation(multiply(r, r), model.var_v) +
                             static_cast<long double>(model.var_e));
}

PredictorSlope predictor_with_slope(const WienerModel& model, double z) {
  // d/dz E h(z+v) = E h'(z+v);  d/dz Var = 2 E[h h'](z+v) - 2 ŷ ŷ'.
  const Poly h = shifted_sensor(model.sensor, z);
  const Poly dh = shifted_sensor(model.sensor.derivative(), z);
  const long double mean = gaussian_expectation(h, model.var_v);
  const long double dmean = gaussian_expectation(dh, model.var_v);
  Poly r = h;
  r[0] -= mean;
  PredictorSlope out;
  out.mean = static_cast<double>(mean);
  out.dmean = static_cast<double>(dmean);
  out.variance = static_cast<double>(gaussian_expectation(multiply(r, r), model.var_v) +
                                     static_cast<long double>(model.var_e));
  out.dvariance = static_cast<double>(
      2.0L * gaussian_expectation(multiply(r, dh), model.var_v));
  return out;
}

MomentReport fourth_and_kappa(const WienerModel& model, double z, KappaSource source) {
  const long double var_v = model.var_v;
  const long double var_e = model.var_e;
  if (source == KappaSource::true_residual) {
    Poly r = shifted_sensor(model.sensor, z);
    const long double mean = gaussian_expectation(r, var_v);
    r[0] -= mean;
    return finish(mean, residual_stats(r, var_v, var_e), var_e);
  }
  const long double h0 = model.sensor.eval(z, 0);
  const long double h1 = model.sensor.eval(z, 1);
  const long double h2 = model.sensor.eval(z, 2);
  const Poly r = {-0.5L * h2 * var_v, h1, 0.5L * h2};
  return finish(h0 + 0.5L * h2 * var_v, residual_stats(r, var_v, var_e), var_e);
}

MomentReport moments_by_quadrature(const WienerModel& model, double z,
                                   const QuadratureRule& rule) {
  const PolynomialSensor& h = model.sensor;
  const double mean = expect_gaussian([&](double v) { return h.eval(z + v); }, 0.0,
                                      model.var_v, rule);
  const double second = expect_gaussian(
      [&](double v) {
        const double r = h.eval(z + v) - mean;
        return r * r;
      },
      0.0, model.var_v, rule);
  const double c = second + model.var_e;
  if (!(c > 0.0)) {
    throw DegenerateDistribution("moments", "output variance is zero; kappa undefined");
  }
  const double third = expect_gaussian(
      [&](double v) {
        const double r = h.eval(z + v) - mean;
        return r * r * r;
      },
      0.0, model.var_v, rule);
  const double d = expect_gaussian2(
      [&](double v, double e) {
        const double eps = h.eval(z + v) - mean + e;
        const double dev = eps * eps - c;
        return dev * dev;
      },
      0.0, model.var_v, 0.0, model.var_e, rule);
  return {mean, c, third, d, d / (2.0 * c * c)};
}

}  // namespace wienerlab
