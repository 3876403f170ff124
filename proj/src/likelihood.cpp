#include "wienerlab/likelihood.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "wienerlab/errors.hpp"
#include "wienerlab/moments.hpp"

namespace wienerlab {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument("likelihood", std::string(what) + ": length mismatch (" +
                                            std::to_string(a) + " vs " +
                                            std::to_string(b) + ")");
  }
}

// Per-z value and slope of (μ, C); the FIR chain rule multiplies the slopes
// by ∂z_t/∂θ_k = u_{t-k}.
struct PointModel {
  double mean, dmean, var, dvar;
};

template <class PointFn>
MeanVarSequence assemble(std::span<const double> theta, std::span<const double> u,
                         PointFn&& point) {
  if (theta.empty()) throw InvalidArgument("likelihood", "empty parameter vector");
  const std::size_t n = u.size();
  const auto m = static_cast<Eigen::Index>(theta.size());
  const std::vector<double> z = linear_outputs(theta, u);

  MeanVarSequence seq;
  seq.means.resize(n);
  seq.variances.resize(n);
  Eigen::MatrixXd dmu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);

  PointModel pm{};
  double last_z = std::nan("");
  for (std::size_t t = 0; t < n; ++t) {
    if (!(z[t] == last_z)) {
      pm = point(z[t]);
      last_z = z[t];
    }
    seq.means[t] = pm.mean;
    seq.variances[t] = pm.var;
    const auto row = static_cast<Eigen::Index>(t);
    for (Eigen::Index k = 0; k < m && static_cast<std::size_t>(k) <= t; ++k) {
      const double dz = u[t - static_cast<std::size_t>(k)];
      dmu(row, k) = pm.dmean * dz;
      dc(row, k) = pm.dvar * dz;
    }
  }
  seq.mean_gradients = std::move(dmu);
  seq.variance_gradients = std::move(dc);
  return seq;
}

}  // namespace

MeanVarKind parse_meanvar_kind(std::string_view name) {
  if (name == "gauss1") return MeanVarKind::gauss1;
  if (name == "gauss2") return MeanVarKind::gauss2;
  if (name == "cmp") return MeanVarKind::cmp;
  throw InvalidArgument("likelihood", "unknown mean/variance model '" + std::string(name) + "'");
}

std::string_view to_string(MeanVarKind kind) {
  switch (kind) {
    case MeanVarKind::gauss1: return "gauss1";
    case MeanVarKind::gauss2: return "gauss2";
    case MeanVarKind::cmp: return "cmp";
  }
  return "?";
}

double gaussian_nll(const MeanVarSequence& seq, std::span<const double> y) {
  check_lengths(seq.means.size(), y.size(), "gaussian_nll");
  check_lengths(seq.variances.size(), y.size(), "gaussian_nll");
  double acc = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double c = seq.variances[t];
    if (!(c > 0.0)) {
      throw InvalidArgument("likelihood", "non-positive variance at sample " +
                                              std::to_string(t + 1));
    }
    const double r = y[t] - seq.means[t];
    acc += r * r / c + std::log(c);
  }
  return 0.5 * acc;
}

Eigen::VectorXd gaussian_nll_gradient(const MeanVarSequence& seq,
                                      std::span<const double> y) {
  check_lengths(seq.means.size(), y.size(), "gaussian_nll_gradient");
  if (!seq.has_gradients()) {
    throw InvalidArgument("likelihood", "sequence carries no gradients");
  }
  const Eigen::MatrixXd& dmu = *seq.mean_gradients;
  const Eigen::MatrixXd& dc = *seq.variance_gradients;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dmu.cols());
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double c = seq.variances[t];
    const double r = y[t] - seq.means[t];
    const auto row = static_cast<Eigen::Index>(t);
    g += (-r / c) * dmu.row(row).transpose();
    g += 0.5 * (1.0 / c - r * r / (c * c)) * dc.row(row).transpose();
  }
  return g;
}

MeanVarSequence meanvar_gauss1(const WienerModel& model, std::span<const double> theta,
                               std::span<const double> u) {
  const PolynomialSensor& h = model.sensor;
  const double sv = model.var_v;
  const double se = model.var_e;
  return assemble(theta, u, [&](double z) {
    const double h1 = h.eval(z, 1);
    const double h2 = h.eval(z, 2);
    return PointModel{h.eval(z), h1, se + h1 * h1 * sv, 2.0 * h1 * h2 * sv};
  });
}

MeanVarSequence meanvar_gauss2(const WienerModel& model, std::span<const double> theta,
                               std::span<const double> u) {
  const PolynomialSensor& h = model.sensor;
  const double sv = model.var_v;
  const double se = model.var_e;
  return assemble(theta, u, [&](double z) {
    const double h0 = h.eval(z);
    const double h1 = h.eval(z, 1);
    const double h2 = h.eval(z, 2);
    const double h3 = h.eval(z, 3);
    return PointModel{h0 + 0.5 * h2 * sv, h1 + 0.5 * h3 * sv,
                      se + h1 * h1 * sv + 0.5 * h2 * h2 * sv * sv,
                      2.0 * h1 * h2 * sv + h2 * h3 * sv * sv};
  });
}

MeanVarSequence meanvar_cmp(const WienerModel& model, std::span<const double> theta,
                            std::span<const double> u) {
  return assemble(theta, u, [&](double z) {
    const PredictorSlope p = predictor_with_slope(model, z);
    return PointModel{p.mean, p.dmean, p.variance, p.dvariance};
  });
}

MeanVarSequence meanvar(MeanVarKind kind, const WienerModel& model,
                        std::span<const double> theta, std::span<const double> u) {
  switch (kind) {
    case MeanVarKind::gauss1: return meanvar_gauss1(model, theta, u);
    case MeanVarKind::gauss2: return meanvar_gauss2(model, theta, u);
    case MeanVarKind::cmp: return meanvar_cmp(model, theta, u);
  }
  throw InvalidArgument("likelihood", "unknown mean/variance model");
}

double exact_nll(const WienerModel& model, std::span<const double> u,
                 std::span<const double> y, const QuadratureRule& rule, Execution exec) {
  model.validate();
  check_lengths(u.size(), y.size(), "exact_nll");
  const std::vector<double> z = linear_outputs(model.theta, u);
  std::vector<double> logp(y.size());
  if (exec == Execution::parallel) {
    kernels::log_marginal_parallel(model.sensor, z, y, model.var_v, model.var_e, rule, logp);
  } else {
    kernels::log_marginal_serial(model.sensor, z, y, model.var_v, model.var_e, rule, logp);
  }
  double acc = 0.0;
  for (double lp : logp) acc -= lp;
  return acc;
}

}  // namespace wienerlab
