#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wienerlab/errors.hpp"
#include "wienerlab/likelihood.hpp"

namespace wienerlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Breakpoint {
  double e;  // measurement-noise value
  double x;  // h^{-1}(y - e)
};

double log_cosh(double a) {
  a = std::abs(a);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

std::vector<double> poly_derivative(const std::vector<double>& q) {
  std::vector<double> d(q.size() > 1 ? q.size() - 1 : 1, 0.0);
  for (std::size_t j = 1; j < q.size(); ++j) d[j - 1] = q[j] * static_cast<double>(j);
  return d;
}

// Solve q(w) = target for w between 0 and `far`, where q(0) = 0 and q is
// monotone on that interval. Starts from the leading-term approximation so
// roots next to a critical point (q ~ a_j w^j) are found without a long
// bisection.
double local_root(const std::vector<double>& q, const std::vector<double>& dq,
                  double target, double far) {
  double lo = std::min(0.0, far);
  double hi = std::max(0.0, far);
  const bool up_is_increasing = evaluate_polynomial(q, hi) > evaluate_polynomial(q, lo);

  double w = 0.5 * (lo + hi);
  for (std::size_t j = 1; j < q.size(); ++j) {
    if (q[j] == 0.0) continue;
    const double ratio = target / q[j];
    double guess = std::pow(std::abs(ratio), 1.0 / static_cast<double>(j));
    if (far < 0.0) guess = -guess;
    if (guess > lo && guess < hi) w = guess;
    break;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double f = evaluate_polynomial(q, w) - target;
    if (f == 0.0) return w;
    if ((f < 0.0) == up_is_increasing) {
      lo = w;
    } else {
      hi = w;
    }
    const double slope = evaluate_polynomial(dq, w);
    double next = slope != 0.0 ? w - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - w);
    w = next;
    if (step <= 2.0 * kEps * std::abs(w) || hi - lo <= 2.0 * kEps * std::abs(w)) break;
  }
  return w;
}

class LogSum {
 public:
  void add(double a) {
    if (!std::isfinite(a)) return;
    if (a <= peak_) {
      sum_ += std::exp(a - peak_);
    } else {
      sum_ = sum_ * std::exp(peak_ - a) + 1.0;
      peak_ = a;
    }
  }
  double value() const { return peak_ + std::log(sum_); }
  bool empty() const { return sum_ == 0.0; }

 private:
  double peak_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

}  // namespace

double invertible_nll(const WienerModel& model, std::span<const double> u,
                      std::span<const double> y, const InvertibleOptions& options) {
  model.validate();
  if (u.size() != y.size()) throw InvalidArgument("likelihood", "invertible_nll: length mismatch");
  if (!(model.var_v > 0.0)) {
    throw InvalidArgument("likelihood", "invertible likelihood needs positive process noise");
  }
  if (!(options.step > 0.0) || !(options.tail > 0.0)) {
    throw InvalidArgument("likelihood", "invalid invertible-likelihood options");
  }
  const PolynomialSensor& h = model.sensor;
  const std::vector<double> z = linear_outputs(model.theta, u);
  const double sd_v = std::sqrt(model.var_v);
  const double sd_e = std::sqrt(model.var_e);
  const auto [zmin, zmax] = std::minmax_element(z.begin(), z.end());
  const Interval bracket{*zmin - options.bracket_sigmas * sd_v,
                         *zmax + options.bracket_sigmas * sd_v};
  if (!h.is_strictly_monotone(bracket)) {
    throw NonInvertible("likelihood", "sensor is not strictly monotone on the working bracket");
  }
  const double h_lo = h.eval(bracket.lower);
  const double h_hi = h.eval(bracket.upper);
  const double image_min = std::min(h_lo, h_hi);
  const double image_max = std::max(h_lo, h_hi);
  const bool increasing = h_hi > h_lo;
  std::vector<double> critical;
  for (double c : h.critical_points(bracket)) {
    if (c > bracket.lower && c < bracket.upper) critical.push_back(c);
  }

  const double log_norm_v = -0.5 * std::log(2.0 * std::numbers::pi * model.var_v);
  const double log_norm_e = -0.5 * std::log(2.0 * std::numbers::pi * model.var_e);
  const auto sample_error = [](std::size_t t, const std::string& why) {
    return EvaluationError("likelihood", "sample " + std::to_string(t + 1) + ": " + why);
  };

  const int half_nodes = static_cast<int>(std::ceil(4.5 / options.step));
  double nll = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double yt = y[t];
    if (!std::isfinite(yt)) throw sample_error(t, "non-finite output");

    if (model.var_e == 0.0) {
      double x;
      try {
        x = h.inverse(yt, bracket);
      } catch (const OutOfRange&) {
        throw sample_error(t, "output outside the sensor image of the working bracket");
      }
      const double slope = std::abs(h.eval(x, 1));
      if (slope == 0.0) throw sample_error(t, "zero sensor slope at the inverse");
      const double r = x - z[t];
      nll -= log_norm_v - r * r / (2.0 * model.var_v) - std::log(slope);
      continue;
    }

    const double e_lo = std::max(-options.tail * sd_e, yt - image_max);
    const double e_hi = std::min(options.tail * sd_e, yt - image_min);
    if (!(e_lo < e_hi)) {
      throw sample_error(t, "inverse out of range: output outside the sensor image");
    }
    const auto preimage = [&](double e) {
      const double target = yt - e;
      if (target <= image_min) return increasing ? bracket.lower : bracket.upper;
      if (target >= image_max) return increasing ? bracket.upper : bracket.lower;
      return h.inverse(target, bracket);
    };

    std::vector<Breakpoint> pts{{e_lo, preimage(e_lo)}, {e_hi, preimage(e_hi)}};
    for (double c : critical) {
      const double ec = yt - h.eval(c);
      if (ec > e_lo && ec < e_hi) pts.push_back({ec, c});
    }
    const double e_peak = yt - h.eval(z[t]);
    if (e_peak > e_lo && e_peak < e_hi) pts.push_back({e_peak, z[t]});
    std::stable_sort(pts.begin(), pts.end(),
                     [](const Breakpoint& a, const Breakpoint& b) { return a.e < b.e; });
    std::vector<Breakpoint> knots;
    for (const Breakpoint& p : pts) {
      if (knots.empty() || p.e - knots.back().e > 8.0 * kEps * std::max(1.0, std::abs(p.e))) {
        knots.push_back(p);
      }
    }

    LogSum acc;
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
      const Breakpoint a = knots[s];
      const Breakpoint b = knots[s + 1];
      const double width = b.e - a.e;
      std::vector<double> qa = h.shifted(a.x);
      std::vector<double> qb = h.shifted(b.x);
      qa[0] = 0.0;
      qb[0] = 0.0;
      const std::vector<double> dqa = poly_derivative(qa);
      const std::vector<double> dqb = poly_derivative(qb);
      const double log_half_width = std::log(0.5 * width);

      for (int k = -half_nodes; k <= half_nodes; ++k) {
        const double arg = k * options.step;
        const double hyp = 0.5 * std::numbers::pi * std::sinh(arg);
        // Distance from the nearer endpoint, computed without cancellation.
        const double delta = width / (1.0 + std::exp(2.0 * std::abs(hyp)));
        if (!(delta > 0.0)) continue;
        double e;
        double w;
        double slope;
        double x;
        if (k <= 0) {
          e = a.e + delta;
          w = local_root(qa, dqa, -delta, b.x - a.x);
          x = a.x + w;
          slope = evaluate_polynomial(dqa, w);
        } else {
          e = b.e - delta;
          w = local_root(qb, dqb, delta, a.x - b.x);
          x = b.x + w;
          slope = evaluate_polynomial(dqb, w);
        }
        if (slope == 0.0) continue;
        const double log_weight = std::log(options.step * 0.5 * std::numbers::pi) +
                                  log_cosh(arg) - 2.0 * log_cosh(hyp) + log_half_width;
        const double rv = x - z[t];
        const double log_term = log_weight + log_norm_v - rv * rv / (2.0 * model.var_v) +
                                log_norm_e - e * e / (2.0 * model.var_e) -
                                std::log(std::abs(slope));
        acc.add(log_term);
      }
    }
    if (acc.empty()) throw sample_error(t, "integrand vanished on every node");
    nll -= acc.value();
  }
  return nll;
}

}  // namespace wienerlab
