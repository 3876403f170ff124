#include "wienerlab/kernels.hpp"

#include <omp.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {

int g_thread_limit = 0;

// Terms more than this far below the per-sample maximum are skipped; their
// total relative contribution is below n·e^{-50}.
constexpr double kLseCutoff = -50.0;

// A cell of the rule resolves the integrand when σ_e / (|h'| Δv) stays above
// this; the aliasing error of a Gaussian bump is then about e^{-44}.
constexpr double kMinCellsPerWidth = 1.5;

// A mode window grows until the log integrand has dropped by this much.
constexpr double kWindowDrop = 40.0;

// Scratch for one sample at a time. `hv` and `dhv` cache h and h' at
// z + s·x_i for the last z, which makes constant-input models evaluate the
// sensor once per call.
struct MarginalWorkspace {
  std::vector<double> hv;
  std::vector<double> dhv;
  std::vector<double> expo;
  double cached_z = std::numeric_limits<double>::quiet_NaN();

  explicit MarginalWorkspace(int order) : hv(order), dhv(order), expo(order) {}
};

struct GaussLegendre {
  static constexpr int kPoints = 8;
  std::array<double, kPoints> nodes;
  std::array<double, kPoints> weights;
};

// Golub-Welsch for the Legendre weight on [-1, 1].
const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule = [] {
    constexpr int n = GaussLegendre::kPoints;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double b = k / std::sqrt(4.0 * k * k - 1.0);
      jacobi(k, k - 1) = jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussLegendre r{};
    for (int i = 0; i < n; ++i) {
      r.nodes[i] = eig.eigenvalues()(i);
      const double v0 = eig.eigenvectors()(0, i);
      r.weights[i] = 2.0 * v0 * v0;
    }
    return r;
  }();
  return rule;
}

struct Window {
  double lower;
  double upper;
  double panel;
};

double log_sum_exp(const std::vector<double>& terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double a : terms) peak = std::max(peak, a);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double a : terms) {
    if (a - peak > kLseCutoff) sum += std::exp(a - peak);
  }
  return peak + std::log(sum);
}

// Some cell that may hold the posterior of v is too coarse for its slope.
bool under_resolved(const QuadratureRule& rule, const MarginalWorkspace& ws, double y,
                    double scale_v, double sd_e, double peak) {
  const double band = 6.0 * sd_e;
  for (int i = 0; i + 1 < rule.order; ++i) {
    if (std::max(rule.log_weights[i], rule.log_weights[i + 1]) < peak - 60.0) continue;
    const double lo = std::min(ws.hv[i], ws.hv[i + 1]) - band;
    const double hi = std::max(ws.hv[i], ws.hv[i + 1]) + band;
    if (y < lo || y > hi) continue;
    const double slope = std::max(std::abs(ws.dhv[i]), std::abs(ws.dhv[i + 1]));
    const double cell = scale_v * (rule.nodes[i + 1] - rule.nodes[i]);
    if (slope * cell * kMinCellsPerWidth > sd_e) return true;
  }
  return false;
}

// Spacing of the rule around v, or infinity outside its node range.
double local_spacing(const QuadratureRule& rule, double scale_v, double v) {
  const double x = v / scale_v;
  const auto it = std::upper_bound(rule.nodes.begin(), rule.nodes.end(), x);
  if (it == rule.nodes.begin() || it == rule.nodes.end()) {
    return std::numeric_limits<double>::infinity();
  }
  return scale_v * (*it - *(it - 1));
}

// Windows around the posterior modes of v that the rule cannot resolve.
// Stationary points of log p(y|v) + log p(v) are the real roots of
// σ_v^2 (y - h(z+v)) h'(z+v) - σ_e^2 v.
std::vector<Window> narrow_modes(const PolynomialSensor& sensor, double z, double y,
                                 double var_v, double var_e, const QuadratureRule& rule,
                                 double scale_v) {
  const std::vector<double> hz = sensor.shifted(z);
  std::vector<double> dh(hz.size() > 1 ? hz.size() - 1 : 1, 0.0);
  for (std::size_t k = 1; k < hz.size(); ++k) dh[k - 1] = static_cast<double>(k) * hz[k];
  std::vector<double> resid(hz.size());
  for (std::size_t k = 0; k < hz.size(); ++k) resid[k] = -hz[k];
  resid[0] += y;
  std::vector<double> stat(resid.size() + dh.size(), 0.0);
  for (std::size_t i = 0; i < resid.size(); ++i) {
    for (std::size_t j = 0; j < dh.size(); ++j) stat[i + j] += var_v * resid[i] * dh[j];
  }
  stat[1] -= var_e;
  std::vector<double> dstat(stat.size() - 1);
  for (std::size_t k = 1; k < stat.size(); ++k) dstat[k - 1] = static_cast<double>(k) * stat[k];

  const auto log_f = [&](double v) {
    const double r = y - evaluate_polynomial(hz, v);
    return -r * r / (2.0 * var_e) - v * v / (2.0 * var_v);
  };
  const double reach = scale_v * rule.nodes.back();
  struct Mode {
    double v, sd, log_f;
  };
  std::vector<Mode> modes;
  double best = -std::numeric_limits<double>::infinity();
  for (double v : real_roots(stat, {-reach, reach})) {
    const double curv = -evaluate_polynomial(dstat, v) / (var_v * var_e);
    if (!(curv > 0.0)) continue;
    modes.push_back({v, 1.0 / std::sqrt(curv), log_f(v)});
    best = std::max(best, modes.back().log_f);
  }

  std::vector<Window> windows;
  for (const Mode& m : modes) {
    if (m.log_f < best - 60.0) continue;
    if (m.sd >= kMinCellsPerWidth * local_spacing(rule, scale_v, m.v)) continue;
    const double floor = m.log_f - kWindowDrop;
    const auto edge = [&](double dir) {
      double v = m.v + dir * 8.0 * m.sd;
      for (int step = 0; step < 400 && log_f(v) > floor; ++step) v += dir * 2.0 * m.sd;
      return v;
    };
    windows.push_back({edge(-1.0), edge(1.0), m.sd});
  }
  std::sort(windows.begin(), windows.end(),
            [](const Window& a, const Window& b) { return a.lower < b.lower; });
  std::vector<Window> merged;
  for (const Window& w : windows) {
    if (!merged.empty() && w.lower <= merged.back().upper) {
      merged.back().upper = std::max(merged.back().upper, w.upper);
      merged.back().panel = std::min(merged.back().panel, w.panel);
    } else {
      merged.push_back(w);
    }
  }
  return merged;
}

// log ∫_W N(v; 0, σ_v^2) exp(-(y - h(z+v))^2 / 2σ_e^2) dv by composite
// Gauss-Legendre with panels no wider than the posterior scale.
double log_window_integral(const PolynomialSensor& sensor, double z, double y,
                           double var_v, double inv_two_var_e, const Window& w) {
  const GaussLegendre& gl = gauss_legendre();
  const double width = w.upper - w.lower;
  const int panels = static_cast<int>(std::clamp(std::ceil(width / w.panel), 1.0, 20000.0));
  const double half = 0.5 * width / panels;
  const double log_prior_norm = -0.5 * std::log(2.0 * std::numbers::pi * var_v);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(panels) * GaussLegendre::kPoints);
  for (int p = 0; p < panels; ++p) {
    const double mid = w.lower + (2 * p + 1) * half;
    for (int k = 0; k < GaussLegendre::kPoints; ++k) {
      const double v = mid + half * gl.nodes[k];
      const double r = y - sensor.eval(z + v);
      terms.push_back(std::log(half * gl.weights[k]) + log_prior_norm -
                      v * v / (2.0 * var_v) - r * r * inv_two_var_e);
    }
  }
  return log_sum_exp(terms);
}

double log_marginal_one(const PolynomialSensor& sensor, double z, double y,
                        double scale_v, double inv_two_var_e, double log_norm,
                        const QuadratureRule& rule, MarginalWorkspace& ws,
                        std::size_t index) {
  if (!std::isfinite(y) || !std::isfinite(z)) {
    throw EvaluationError("likelihood",
                          "non-finite data at sample " + std::to_string(index + 1));
  }
  if (scale_v == 0.0) {
    const double r = y - sensor.eval(z);
    return log_norm - r * r * inv_two_var_e;
  }
  const int n = rule.order;
  if (!(z == ws.cached_z)) {
    for (int i = 0; i < n; ++i) {
      const double x = z + scale_v * rule.nodes[i];
      ws.hv[i] = sensor.eval(x);
      ws.dhv[i] = sensor.derivative_at(x, 1);
    }
    ws.cached_z = z;
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double r = y - ws.hv[i];
    const double a = rule.log_weights[i] - r * r * inv_two_var_e;
    ws.expo[i] = a;
    if (a > peak) peak = a;
  }
  if (!std::isfinite(peak)) {
    throw EvaluationError("likelihood", "all quadrature terms underflow at sample " +
                                            std::to_string(index + 1));
  }
  // 1/√π from the Gauss-Hermite change of variables.
  const double log_gh = log_norm - 0.5 * std::log(std::numbers::pi);
  const double sd_e = std::sqrt(0.5 / inv_two_var_e);
  if (under_resolved(rule, ws, y, scale_v, sd_e, peak)) {
    const double var_v = 0.5 * scale_v * scale_v;
    const double var_e = sd_e * sd_e;
    const std::vector<Window> windows =
        narrow_modes(sensor, z, y, var_v, var_e, rule, scale_v);
    if (!windows.empty()) {
      std::vector<double> terms;
      std::size_t w = 0;
      for (int i = 0; i < n; ++i) {
        const double v = scale_v * rule.nodes[i];
        while (w < windows.size() && windows[w].upper < v) ++w;
        if (w < windows.size() && v >= windows[w].lower) continue;
        terms.push_back(log_gh + ws.expo[i]);
      }
      for (const Window& win : windows) {
        terms.push_back(log_norm + log_window_integral(sensor, z, y, var_v, inv_two_var_e, win));
      }
      return log_sum_exp(terms);
    }
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = ws.expo[i] - peak;
    if (d > kLseCutoff) sum += std::exp(d);
  }
  return log_gh + peak + std::log(sum);
}

struct MarginalSetup {
  double scale_v;
  double inv_two_var_e;
  double log_norm;
};

MarginalSetup setup(std::span<const double> z, std::span<const double> y,
                    std::span<double> out, double var_v, double var_e) {
  if (z.size() != y.size() || out.size() != y.size()) {
    throw InvalidArgument("likelihood", "length mismatch in marginal likelihood kernel");
  }
  if (!(var_e > 0.0)) {
    throw SingularLikelihood("likelihood",
                             "exact likelihood needs a positive measurement noise variance");
  }
  if (!(var_v >= 0.0)) throw InvalidArgument("likelihood", "negative process noise variance");
  return {std::sqrt(2.0 * var_v), 0.5 / var_e,
          -0.5 * std::log(2.0 * std::numbers::pi * var_e)};
}

}  // namespace

void set_thread_limit(int threads) {
  g_thread_limit = threads > 0 ? threads : 0;
  omp_set_num_threads(g_thread_limit > 0 ? g_thread_limit : omp_get_num_procs());
}

int thread_limit() { return g_thread_limit; }

namespace kernels {

void log_marginal_serial(const PolynomialSensor& sensor, std::span<const double> z,
                         std::span<const double> y, double var_v, double var_e,
                         const QuadratureRule& rule, std::span<double> out) {
  const MarginalSetup s = setup(z, y, out, var_v, var_e);
  MarginalWorkspace ws(rule.order);
  for (std::size_t t = 0; t < y.size(); ++t) {
    out[t] = log_marginal_one(sensor, z[t], y[t], s.scale_v, s.inv_two_var_e,
                              s.log_norm, rule, ws, t);
  }
}

void log_marginal_parallel(const PolynomialSensor& sensor, std::span<const double> z,
                           std::span<const double> y, double var_v, double var_e,
                           const QuadratureRule& rule, std::span<double> out) {
  const MarginalSetup s = setup(z, y, out, var_v, var_e);
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  std::exception_ptr failure;
#pragma omp parallel
  {
    MarginalWorkspace ws(rule.order);
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      try {
        out[t] = log_marginal_one(sensor, z[t], y[t], s.scale_v, s.inv_two_var_e,
                                  s.log_norm, rule, ws, static_cast<std::size_t>(t));
      } catch (...) {
#pragma omp critical(wienerlab_kernel_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void for_each_index_serial(std::size_t n, const std::function<void(std::size_t)>& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

void for_each_index_parallel(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wienerlab_index_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kernels
}  // namespace wienerlab
