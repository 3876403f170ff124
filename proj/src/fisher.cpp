#include "wienerlab/fisher.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {

constexpr double kMaxCondition = 1e12;

Eigen::MatrixXd accumulate(const MeanVarSequence& seq, std::span<const double> kappas,
                           std::span<const double> thirds) {
  if (!seq.has_gradients()) {
    throw InvalidArgument("fisher", "mean/variance sequence carries no gradients");
  }
  const Eigen::MatrixXd& dmu = *seq.mean_gradients;
  const Eigen::MatrixXd& dc = *seq.variance_gradients;
  const std::size_t n = seq.size();
  if (n == 0) throw InvalidArgument("fisher", "empty mean/variance sequence");
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dmu.cols(), dmu.cols());
  for (std::size_t t = 0; t < n; ++t) {
    const double c = seq.variances[t];
    if (!(c > 0.0)) {
      throw InvalidArgument("fisher", "non-positive variance at sample " + std::to_string(t + 1));
    }
    const auto row = static_cast<Eigen::Index>(t);
    const double kappa = kappas.empty() ? 1.0 : kappas[t];
    info.noalias() += dmu.row(row).transpose() * dmu.row(row) / c;
    info.noalias() += (kappa / (2.0 * c * c)) * dc.row(row).transpose() * dc.row(row);
    if (!thirds.empty() && thirds[t] != 0.0) {
      const Eigen::MatrixXd cross = dmu.row(row).transpose() * dc.row(row);
      info.noalias() += (thirds[t] / (2.0 * c * c * c)) * (cross + cross.transpose());
    }
  }
  info /= static_cast<double>(n);
  return 0.5 * (info + info.transpose());
}

struct Derivs {
  double h1, h2, h3;
};

Derivs derivs(const PolynomialSensor& s, double m0) {
  return {s.eval(m0, 1), s.eval(m0, 2), s.eval(m0, 3)};
}

}  // namespace

Eigen::MatrixXd fim_gaussian(const MeanVarSequence& seq) { return accumulate(seq, {}, {}); }

Eigen::MatrixXd score_cov(const MeanVarSequence& seq, std::span<const double> kappas,
                          std::span<const double> thirds) {
  if (kappas.size() != seq.size()) {
    throw InvalidArgument("fisher", "kappa list length " + std::to_string(kappas.size()) +
                                        " does not match " + std::to_string(seq.size()) +
                                        " samples");
  }
  for (double k : kappas) {
    if (!(k >= 0.0)) throw InvalidArgument("fisher", "kappa must be non-negative");
  }
  if (!thirds.empty() && thirds.size() != seq.size()) {
    throw InvalidArgument("fisher", "third-moment list length does not match the samples");
  }
  return accumulate(seq, kappas, thirds);
}

Eigen::MatrixXd information_inverse(const Eigen::MatrixXd& fim) {
  if (fim.rows() != fim.cols() || fim.rows() == 0) {
    throw InvalidArgument("fisher", "information matrix must be square and non-empty");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fim, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) {
    throw SingularInformation("fisher", "information matrix is singular or ill-conditioned");
  }
  if (fim.rows() == 1) return Eigen::MatrixXd::Constant(1, 1, 1.0 / fim(0, 0));
  Eigen::LLT<Eigen::MatrixXd> llt(fim);
  if (llt.info() != Eigen::Success) {
    throw SingularInformation("fisher", "Cholesky factorization failed");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(fim.rows(), fim.cols()));
  return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& fim, const Eigen::MatrixXd& score_cov) {
  if (score_cov.rows() != fim.rows() || score_cov.cols() != fim.cols()) {
    throw InvalidArgument("fisher", "score covariance and information sizes differ");
  }
  const Eigen::MatrixXd inv = information_inverse(fim);
  if (score_cov == fim) return inv;
  Eigen::MatrixXd out = inv * score_cov * inv;
  return 0.5 * (out + out.transpose());
}

double fim_result1(const PolynomialSensor& sensor, double m0, double var_v, double var_e) {
  const Derivs d = derivs(sensor, m0);
  const double c = var_e + d.h1 * d.h1 * var_v;
  if (!(c > 0.0)) throw DegenerateDistribution("fisher", "first-order model variance is zero");
  const double ratio = var_v * d.h1 * d.h2 / c;
  return d.h1 * d.h1 / c + 2.0 * ratio * ratio;
}

double fim_result2(const PolynomialSensor& sensor, double m0, double var_v, double var_e) {
  const Derivs d = derivs(sensor, m0);
  if (d.h1 == 0.0) throw DegenerateDistribution("fisher", "sensor slope vanishes at m0");
  const double c = var_e + d.h1 * d.h1 * var_v;
  if (!(c > 0.0)) throw DegenerateDistribution("fisher", "first-order model variance is zero");
  const double ratio = var_e * d.h2 / (d.h1 * c);
  return 1.0 / (var_v + var_e / (d.h1 * d.h1)) + 2.0 * ratio * ratio;
}

double fim_result3(const PolynomialSensor& sensor, double m0, double var_v, double var_e) {
  const Derivs d = derivs(sensor, m0);
  const double c = var_e + d.h1 * d.h1 * var_v + 0.5 * d.h2 * d.h2 * var_v * var_v;
  if (!(c > 0.0)) throw DegenerateDistribution("fisher", "second-order model variance is zero");
  const double slope = d.h1 + 0.5 * d.h3 * var_v;
  const double ratio = d.h2 * var_v * slope / c;
  return slope * slope / c + 2.0 * ratio * ratio;
}

FisherReport fim_result4(const PolynomialSensor& sensor, double m0, double var_v,
                         double var_e, const ScalarFisherOptions& options) {
  const WienerModel model{{m0}, sensor, var_v, var_e};
  model.validate();
  double dmean;
  double c;
  double dc;
  if (options.moments == ScalarMoments::second_order) {
    const Derivs d = derivs(sensor, m0);
    dmean = d.h1 + 0.5 * d.h3 * var_v;
    c = var_e + d.h1 * d.h1 * var_v + 0.5 * d.h2 * d.h2 * var_v * var_v;
    dc = 2.0 * d.h2 * var_v * dmean;
  } else {
    const PredictorSlope p = predictor_with_slope(model, m0);
    dmean = p.dmean;
    c = p.variance;
    dc = p.dvariance;
  }
  if (!(c > 0.0)) throw DegenerateDistribution("fisher", "model variance is zero");
  const MomentReport mom = fourth_and_kappa(model, m0, options.kappa);
  const double kappa = mom.kappa;

  const double mean_term = dmean * dmean / c;
  double var_term = 0.5 * dc * dc / (c * c);
  if (options.printed_variant) {
    if (!(var_v > 0.0)) throw InvalidArgument("fisher", "printed variant needs σ_v^2 > 0");
    var_term /= var_v;
  }
  const double fim = mean_term + var_term;
  double j = mean_term + kappa * var_term;
  if (options.third_moment) j += dmean * dc * mom.third / (c * c * c);
  if (!(fim > 0.0)) throw SingularInformation("fisher", "zero information");

  FisherReport rep;
  rep.fim = Eigen::MatrixXd::Constant(1, 1, fim);
  rep.score_cov = Eigen::MatrixXd::Constant(1, 1, j);
  rep.crlb = Eigen::MatrixXd::Constant(1, 1, 1.0 / fim);
  rep.ascov = Eigen::MatrixXd::Constant(1, 1, j / (fim * fim));
  rep.gamma = j / fim;
  rep.kappa_min = rep.kappa_max = kappa;
  rep.fim_is_bound = sensor.degree() <= 1 || sensor.degree() == 2;
  return rep;
}

FisherReport fisher_report(const WienerModel& model, std::span<const double> theta0,
                           std::span<const double> u, MeanVarKind kind,
                           const FisherOptions& options) {
  model.validate();
  if (u.empty()) throw InvalidArgument("fisher", "need at least one sample");
  const MeanVarSequence seq = meanvar(kind, model, theta0, u);
  const std::vector<double> z = linear_outputs(theta0, u);

  std::vector<double> kappas(z.size());
  std::vector<double> thirds;
  const bool with_third = options.third_moment && !options.kappa_override;
  if (with_third) thirds.resize(z.size());
  double last_z = std::nan("");
  MomentReport last;
  for (std::size_t t = 0; t < z.size(); ++t) {
    if (options.kappa_override) {
      kappas[t] = *options.kappa_override;
      continue;
    }
    if (!(z[t] == last_z)) {
      last = fourth_and_kappa(model, z[t], options.kappa);
      last_z = z[t];
    }
    kappas[t] = last.kappa;
    if (with_third) thirds[t] = last.third;
  }

  FisherReport rep;
  rep.fim = fim_gaussian(seq);
  rep.score_cov = score_cov(seq, kappas, thirds);
  rep.crlb = information_inverse(rep.fim);
  rep.ascov = sandwich(rep.fim, rep.score_cov);
  if (rep.fim.rows() == 1) rep.gamma = rep.score_cov(0, 0) / rep.fim(0, 0);
  const auto [kmin, kmax] = std::minmax_element(kappas.begin(), kappas.end());
  rep.kappa_min = *kmin;
  rep.kappa_max = *kmax;
  const int degree = model.sensor.degree();
  rep.fim_is_bound = degree <= 1 || (degree == 2 && kind != MeanVarKind::gauss1);
  return rep;
}

NumericGradients numeric_meanvar_gradients(MeanVarKind kind, const WienerModel& model,
                                           std::span<const double> theta,
                                           std::span<const double> u, double rel_step) {
  const auto n = static_cast<Eigen::Index>(u.size());
  const auto m = static_cast<Eigen::Index>(theta.size());
  NumericGradients g{Eigen::MatrixXd(n, m), Eigen::MatrixXd(n, m)};
  std::vector<double> probe(theta.begin(), theta.end());
  for (Eigen::Index k = 0; k < m; ++k) {
    const double step = rel_step * std::max(1.0, std::abs(theta[k]));
    probe[k] = theta[k] + step;
    const MeanVarSequence up = meanvar(kind, model, probe, u);
    probe[k] = theta[k] - step;
    const MeanVarSequence down = meanvar(kind, model, probe, u);
    probe[k] = theta[k];
    for (Eigen::Index t = 0; t < n; ++t) {
      g.mean(t, k) = (up.means[t] - down.means[t]) / (2.0 * step);
      g.variance(t, k) = (up.variances[t] - down.variances[t]) / (2.0 * step);
    }
  }
  return g;
}

}  // namespace wienerlab
