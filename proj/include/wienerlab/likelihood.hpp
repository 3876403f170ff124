#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wienerlab/kernels.hpp"
#include "wienerlab/quadrature.hpp"
#include "wienerlab/system.hpp"

namespace wienerlab {

// Per-sample Gaussian description y_t ~ N(μ_t(θ), C_t(θ)).
struct MeanVarSequence {
  std::vector<double> means;
  std::vector<double> variances;
  // N x m matrices of ∂μ_t/∂θ and ∂C_t/∂θ (row t).
  std::optional<Eigen::MatrixXd> mean_gradients;
  std::optional<Eigen::MatrixXd> variance_gradients;

  std::size_t size() const { return means.size(); }
  bool has_gradients() const { return mean_gradients && variance_gradients; }
};

enum class MeanVarKind { gauss1, gauss2, cmp };

MeanVarKind parse_meanvar_kind(std::string_view name);
std::string_view to_string(MeanVarKind kind);

// ½ Σ [(y_t - μ_t)^2 / C_t + log C_t], no additive constants.
double gaussian_nll(const MeanVarSequence& seq, std::span<const double> y);

// θ-gradient of gaussian_nll assembled from the sequence gradients.
Eigen::VectorXd gaussian_nll_gradient(const MeanVarSequence& seq,
                                      std::span<const double> y);

// First-order model: μ = h(z), C = σ_e^2 + h'(z)^2 σ_v^2.
MeanVarSequence meanvar_gauss1(const WienerModel& model, std::span<const double> theta,
                               std::span<const double> u);
// Second-order model: μ = h + h''σ_v^2/2, C = σ_e^2 + h'^2 σ_v^2 + h''^2 σ_v^4/2.
MeanVarSequence meanvar_gauss2(const WienerModel& model, std::span<const double> theta,
                               std::span<const double> u);
// Conditional mean predictor and its prediction-error variance.
MeanVarSequence meanvar_cmp(const WienerModel& model, std::span<const double> theta,
                            std::span<const double> u);
MeanVarSequence meanvar(MeanVarKind kind, const WienerModel& model,
                        std::span<const double> theta, std::span<const double> u);

// Σ_t -log E_v{ N(y_t; h(z_t + v), σ_e^2) } with z_t from model.theta, the
// expectation by Gauss-Hermite quadrature and log-sum-exp per sample.
double exact_nll(const WienerModel& model, std::span<const double> u,
                 std::span<const double> y, const QuadratureRule& rule,
                 Execution exec = Execution::parallel);

struct InvertibleOptions {
  // tanh-sinh step; nodes per segment ≈ 9 / step.
  double step = 1.0 / 64.0;
  // e-integration limited to ±tail·σ_e.
  double tail = 12.0;
  // Half-width of the working bracket around the linear outputs, in σ_v.
  double bracket_sigmas = 8.0;
};

// Same likelihood through the change of variables x = h^{-1}(y_t - e):
//   p(y_t) = ∫ p_v(x - z_t) / |h'(x)| p_e(e) de.
// The e-integral is split at the critical values of h (where the integrand
// has an integrable singularity) and at the p_v peak, and each piece is
// integrated with a double-exponential rule.
double invertible_nll(const WienerModel& model, std::span<const double> u,
                      std::span<const double> y, const InvertibleOptions& options = {});

}  // namespace wienerlab
