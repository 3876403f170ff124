#include "wienerlab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace wienerlab {

namespace {

// Orthonormal Hermite recurrence
//   sqrt((k+1)/2) p_{k+1} = x p_k - sqrt(k/2) p_{k-1},  p_0 = pi^{-1/4},
// carried with a running power-of-ten scale so large |x| cannot overflow.
struct RecurrenceValue {
  double p_n;
  double p_n_minus_1;
  double log_scale;
};

RecurrenceValue orthonormal_hermite(double x, const std::vector<double>& half_k) {
  constexpr double kRescale = 1e150;
  const double kLogRescale = std::log(kRescale);
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  double log_scale = 0.0;
  const std::size_t n = half_k.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = (x * cur - half_k[k] * prev) / half_k[k + 1];
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescale) {
      cur /= kRescale;
      prev /= kRescale;
      log_scale += kLogRescale;
    }
  }
  return {cur, prev, log_scale};
}

}  // namespace

QuadratureRule hermite_rule(int order) {
  if (order < 1 || order > kMaxHermiteOrder) {
    throw InvalidArgument("quadrature", "Gauss-Hermite order must lie in [1, " +
                                            std::to_string(kMaxHermiteOrder) +
                                            "], got " + std::to_string(order));
  }
  const int n = order;
  QuadratureRule rule;
  rule.order = n;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  rule.log_weights.assign(n, 0.0);

  // half_k[k] = sqrt(k/2), k = 0..n
  std::vector<double> half_k(n + 1);
  for (int k = 0; k <= n; ++k) half_k[k] = std::sqrt(0.5 * k);

  std::vector<double> raw(n, 0.0);
  if (n > 1) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = half_k[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw EvaluationError("quadrature", "Jacobi eigenvalue iteration failed");
    }
    for (int i = 0; i < n; ++i) raw[i] = solver.eigenvalues()[i];
  }

  const double newton_scale = std::sqrt(2.0 * n);
  const double log_n = std::log(static_cast<double>(n));
  // Work on the non-negative half and mirror it.
  const int half = n / 2;
  for (int i = n - 1; i >= half; --i) {
    double x = (n % 2 == 1 && i == half) ? 0.0 : raw[i];
    RecurrenceValue r = orthonormal_hermite(x, half_k);
    for (int iter = 0; iter < 4 && x != 0.0; ++iter) {
      const double dx = r.p_n / (newton_scale * r.p_n_minus_1);
      x -= dx;
      r = orthonormal_hermite(x, half_k);
      if (std::abs(dx) <= 1e-16 * (1.0 + std::abs(x))) break;
    }
    const double log_w =
        -log_n - 2.0 * (std::log(std::abs(r.p_n_minus_1)) + r.log_scale);
    const int mirror = n - 1 - i;
    rule.nodes[i] = x;
    rule.nodes[mirror] = -x;
    rule.log_weights[i] = log_w;
    rule.log_weights[mirror] = log_w;
  }
  for (int i = 0; i < n; ++i) rule.weights[i] = std::exp(rule.log_weights[i]);
  return rule;
}

}  // namespace wienerlab
