#include "wienerlab/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::vector<double> trimmed(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  if (c.empty()) c.push_back(0.0);
  return c;
}

std::vector<double> differentiate(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = c[j] * static_cast<double>(j);
  return trimmed(std::move(d));
}

// Σ_j |c_j| |x|^j, the rounding scale for evaluating the polynomial at x.
double magnitude(const std::vector<double>& c, double x) {
  double acc = 0.0;
  const double ax = std::abs(x);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * ax + std::abs(*it);
  return acc;
}

double bisect_root(const std::vector<double>& c, double a, double b) {
  double fa = evaluate_polynomial(c, a);
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double fm = evaluate_polynomial(c, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double evaluate_polynomial(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> real_roots(const std::vector<double>& coeffs,
                               const Interval& bracket) {
  const std::vector<double> c = trimmed(coeffs);
  const int degree = static_cast<int>(c.size()) - 1;
  std::vector<double> roots;
  if (degree == 0) return roots;
  if (degree == 1) {
    const double r = -c[0] / c[1];
    if (r >= bracket.lower && r <= bracket.upper) roots.push_back(r);
    return roots;
  }
  // Between consecutive critical points the polynomial is monotone, so each
  // segment holds at most one simple root; double roots sit on critical points.
  const std::vector<double> crit = real_roots(differentiate(c), bracket);
  std::vector<double> pts;
  pts.push_back(bracket.lower);
  pts.insert(pts.end(), crit.begin(), crit.end());
  pts.push_back(bracket.upper);

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double fx = evaluate_polynomial(c, pts[i]);
    const bool is_crit = i > 0 && i + 1 < pts.size();
    if (fx == 0.0 || (is_crit && std::abs(fx) <= 1e-12 * magnitude(c, pts[i]))) {
      roots.push_back(pts[i]);
    }
    if (i + 1 < pts.size()) {
      const double fy = evaluate_polynomial(c, pts[i + 1]);
      if ((fx < 0.0 && fy > 0.0) || (fx > 0.0 && fy < 0.0)) {
        roots.push_back(bisect_root(c, pts[i], pts[i + 1]));
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || std::abs(r - unique.back()) > 1e-12 * std::max(1.0, std::abs(r))) {
      unique.push_back(r);
    }
  }
  return unique;
}

PolynomialSensor::PolynomialSensor(std::vector<double> coefficients, std::string label)
    : coeffs_(trimmed(std::move(coefficients))), label_(std::move(label)) {
  if (degree() > kMaxDegree) {
    throw InvalidArgument("sensor", "polynomial degree above " +
                                        std::to_string(kMaxDegree));
  }
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw InvalidArgument("sensor", "non-finite coefficient");
  }
}

PolynomialSensor PolynomialSensor::linear(double gain) {
  return PolynomialSensor({0.0, gain}, "linear");
}

PolynomialSensor PolynomialSensor::quadratic() {
  return PolynomialSensor({0.0, 0.0, 0.5}, "quadratic");
}

PolynomialSensor PolynomialSensor::cubic() {
  return PolynomialSensor({0.0, 0.0, 0.0, 1.0 / 3.0}, "cubic");
}

double PolynomialSensor::eval(double x, int derivative_order) const {
  if (derivative_order < 0 || derivative_order > 3) {
    throw InvalidArgument("sensor", "derivative order must be in 0..3");
  }
  return derivative_at(x, derivative_order);
}

double PolynomialSensor::derivative_at(double x, int order) const {
  if (order < 0) throw InvalidArgument("sensor", "negative derivative order");
  if (order > degree()) return 0.0;
  // Horner on c_j * j!/(j-k)!
  double acc = 0.0;
  for (int j = degree(); j >= order; --j) {
    double falling = 1.0;
    for (int i = 0; i < order; ++i) falling *= static_cast<double>(j - i);
    acc = acc * x + coeffs_[j] * falling;
  }
  return acc;
}

PolynomialSensor PolynomialSensor::derivative() const {
  return PolynomialSensor(differentiate(coeffs_));
}

std::vector<double> PolynomialSensor::shifted(double x0) const {
  // Repeated synthetic division by (x - x0).
  std::vector<double> a = coeffs_;
  const int d = degree();
  for (int k = 0; k < d; ++k) {
    for (int j = d - 1; j >= k; --j) a[j] += x0 * a[j + 1];
  }
  return a;
}

std::vector<double> PolynomialSensor::critical_points(const Interval& bracket) const {
  return real_roots(differentiate(coeffs_), bracket);
}

bool PolynomialSensor::is_strictly_monotone(const Interval& bracket) const {
  const std::vector<double> d = differentiate(coeffs_);
  if (d.size() == 1 && d[0] == 0.0) return false;
  if (!(bracket.upper > bracket.lower)) return false;

  bool seen_pos = false;
  bool seen_neg = false;
  constexpr int kGrid = 1024;
  for (int i = 0; i < kGrid; ++i) {
    const double x = bracket.lower + (bracket.upper - bracket.lower) * i / (kGrid - 1);
    const double v = evaluate_polynomial(d, x);
    seen_pos |= v > 0.0;
    seen_neg |= v < 0.0;
  }
  if (seen_pos && seen_neg) return false;

  for (double r : real_roots(d, bracket)) {
    if (r <= bracket.lower || r >= bracket.upper) continue;
    const double step = 1e-6 * std::max(1.0, std::abs(r));
    const double left = evaluate_polynomial(d, std::max(bracket.lower, r - step));
    const double right = evaluate_polynomial(d, std::min(bracket.upper, r + step));
    if ((left < 0.0 && right > 0.0) || (left > 0.0 && right < 0.0)) return false;
  }
  return true;
}

double PolynomialSensor::inverse(double y, const Interval& bracket) const {
  if (!is_strictly_monotone(bracket)) {
    throw NonInvertible("sensor", "sensor is not strictly monotone on [" +
                                      std::to_string(bracket.lower) + ", " +
                                      std::to_string(bracket.upper) + "]");
  }
  const double h_lo = eval(bracket.lower);
  const double h_hi = eval(bracket.upper);
  const bool increasing = h_hi > h_lo;
  const double tol = 1e-12 * std::max(1.0, std::abs(y));
  if (y < std::min(h_lo, h_hi) - tol || y > std::max(h_lo, h_hi) + tol) {
    throw OutOfRange("sensor", "value " + std::to_string(y) +
                                   " outside the image of the bracket");
  }

  double a = bracket.lower;
  double b = bracket.upper;
  double x = 0.5 * (a + b);
  for (int iter = 0; iter < 300; ++iter) {
    const double fx = eval(x) - y;
    if (fx == 0.0) return x;
    if ((fx < 0.0) == increasing) {
      a = x;
    } else {
      b = x;
    }
    const double slope = eval(x, 1);
    double next = slope != 0.0 ? x - fx / slope : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 2.0 * kEps * std::max(1.0, std::abs(x)) || b - a <= kEps * std::max(1.0, std::abs(x))) {
      break;
    }
  }
  return x;
}

}  // namespace wienerlab
