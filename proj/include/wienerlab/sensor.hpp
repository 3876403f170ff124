#pragma once

#include <string>
#include <vector>

namespace wienerlab {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/**
 * Static sensor nonlinearity h(x) = Σ_j c_j x^j, degree ≤ 8.
 *
 * Coefficients are stored with trailing zeros trimmed, so `degree()` always
 * reflects the highest nonzero coefficient (the zero polynomial has degree 0
 * and a single zero coefficient).
 */
class PolynomialSensor {
 public:
  static constexpr int kMaxDegree = 8;

  PolynomialSensor() : PolynomialSensor(std::vector<double>{0.0}) {}
  explicit PolynomialSensor(std::vector<double> coefficients,
                            std::string label = {});

  static PolynomialSensor linear(double gain);
  static PolynomialSensor quadratic();  // x^2 / 2
  static PolynomialSensor cubic();      // x^3 / 3

  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::string& label() const { return label_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  // h^{(k)}(x) for k in 0..3 by Horner's scheme.
  double eval(double x, int derivative_order = 0) const;

  // Any derivative order, no range restriction; orders above the degree give 0.
  double derivative_at(double x, int order) const;

  PolynomialSensor derivative() const;

  // Coefficients of w ↦ h(x0 + w).
  std::vector<double> shifted(double x0) const;

  // Real roots of h' inside [lower, upper], ascending.
  std::vector<double> critical_points(const Interval& bracket) const;

  // h' keeps one sign (zeros only at isolated points without a sign change)
  // and is not identically zero. Checked on a 1024-point grid and at the real
  // roots of h'.
  bool is_strictly_monotone(const Interval& bracket) const;

  // Solve h(x) = y on the bracket by bisection with Newton refinement.
  // Throws NonInvertible or OutOfRange.
  double inverse(double y, const Interval& bracket) const;

 private:
  std::vector<double> coeffs_;
  std::string label_;
};

// Horner evaluation of Σ_j c_j x^j.
double evaluate_polynomial(const std::vector<double>& coeffs, double x);

// Real roots of a polynomial in [lower, upper], ascending. Multiple roots are
// reported once.
std::vector<double> real_roots(const std::vector<double>& coeffs,
                               const Interval& bracket);

}  // namespace wienerlab
