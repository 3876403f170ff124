#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "wienerlab/likelihood.hpp"
#include "wienerlab/moments.hpp"

namespace wienerlab {

// Asymptotic (per-sample) information of a Gaussian mean/variance criterion,
// its score covariance under the true output distribution, and the sandwich
// covariance of the criterion minimizer.
struct FisherReport {
  Eigen::MatrixXd fim;
  Eigen::MatrixXd score_cov;
  Eigen::MatrixXd crlb;   // fim^{-1}
  Eigen::MatrixXd ascov;  // fim^{-1} J fim^{-1}
  std::optional<double> gamma;  // J / fim for scalar θ
  double kappa_min = 1.0;
  double kappa_max = 1.0;
  // True when the mean/variance family is exact for the sensor, so fim^{-1}
  // is a bound and not just the information of an approximate model.
  bool fim_is_bound = false;
};

// (1/N) Σ_t [∇μ_t ∇μ_tᵀ / C_t + ∇C_t ∇C_tᵀ / (2 C_t^2)]
Eigen::MatrixXd fim_gaussian(const MeanVarSequence& seq);

// (1/N) Σ_t [∇μ_t ∇μ_tᵀ / C_t + κ_t ∇C_t ∇C_tᵀ / (2 C_t^2)
//            + s_t (∇μ_t ∇C_tᵀ + ∇C_t ∇μ_tᵀ) / (2 C_t^3)]
// with s_t = E{(y_t - μ_t)^3}. An empty `thirds` drops the last term, which is
// exact only for symmetric residuals.
Eigen::MatrixXd score_cov(const MeanVarSequence& seq, std::span<const double> kappas,
                          std::span<const double> thirds = {});

// Inverse of a symmetric positive definite information matrix. Throws
// SingularInformation when it is not positive definite or its condition
// number exceeds 1e12.
Eigen::MatrixXd information_inverse(const Eigen::MatrixXd& fim);

// fim^{-1} J fim^{-1}, symmetrized; exactly fim^{-1} when J == fim.
Eigen::MatrixXd sandwich(const Eigen::MatrixXd& fim, const Eigen::MatrixXd& score_cov);

// Scalar constant-mean model y = h(m + v) + e, m0 the true value.

// First-order model μ = h(m), C = σ_e^2 + h'^2 σ_v^2.
double fim_result1(const PolynomialSensor& sensor, double m0, double var_v, double var_e);
// First-order model of h^{-1}(y): μ = m, C = σ_v^2 + σ_e^2 / h'^2.
double fim_result2(const PolynomialSensor& sensor, double m0, double var_v, double var_e);
// Second-order model μ = h + h''σ_v^2/2, C = σ_e^2 + h'^2 σ_v^2 + h''^2 σ_v^4/2.
double fim_result3(const PolynomialSensor& sensor, double m0, double var_v, double var_e);

// Mean/variance pair the scalar sandwich is evaluated on.
enum class ScalarMoments {
  second_order,  // closed second-order model (the fim_result3 family)
  conditional,   // exact conditional mean/variance (the CMP model)
};

struct ScalarFisherOptions {
  ScalarMoments moments = ScalarMoments::conditional;
  KappaSource kappa = KappaSource::true_residual;
  // Divide the variance-information term by σ_v^2. For the quadratic sensor
  // at m0 = 1, σ_e = σ_v this is the variance numerator 4σ_v^2 in place of
  // 4σ_v^4; kept only to reproduce those printed values.
  bool printed_variant = false;
  // Add the residual-skewness cross term to J. Off by default: the tabulated
  // closed form carries only the κ term.
  bool third_moment = false;
};

FisherReport fim_result4(const PolynomialSensor& sensor, double m0, double var_v,
                         double var_e, const ScalarFisherOptions& options = {});

struct FisherOptions {
  KappaSource kappa = KappaSource::true_residual;
  // Treats the residual as symmetric with the given κ: replaces every κ_t and
  // drops the skewness term, so forcing 1 gives the Gaussian CRLB.
  std::optional<double> kappa_override;
  // Include the residual-skewness cross term in J. Without it the sandwich
  // understates the spread of curved-sensor estimates.
  bool third_moment = true;
};

FisherReport fisher_report(const WienerModel& model, std::span<const double> theta0,
                           std::span<const double> u, MeanVarKind kind,
                           const FisherOptions& options = {});

// Central-difference gradients of μ_t and C_t, step rel_step·max(1, |θ_k|).
struct NumericGradients {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd variance;
};
NumericGradients numeric_meanvar_gradients(MeanVarKind kind, const WienerModel& model,
                                           std::span<const double> theta,
                                           std::span<const double> u,
                                           double rel_step = 1e-6);

}  // namespace wienerlab
