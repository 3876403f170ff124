#include "wienerlab/estimate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {

constexpr double kGolden = 0.3819660112501051;  // (3 - √5) / 2

double checked_value(double v, double at) {
  if (!std::isfinite(v)) {
    throw EvaluationError("estimate", "cost is not finite at θ = " + std::to_string(at));
  }
  return v;
}

// Scalar bracket [lo, hi]. Gaussian criteria are cheap, so a coarse scan picks
// the best cell before Brent refines it; that protects against a far-off local
// minimum in wide positivity brackets.
ScalarMinimum scan_then_refine(const std::function<double(double)>& f, double lo, double hi,
                               double tol, int cells) {
  std::vector<double> grid(cells + 1);
  std::vector<double> vals(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    grid[i] = lo + (hi - lo) * i / cells;
    vals[i] = f(grid[i]);
  }
  const auto best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  const double a = grid[std::max(best - 1, 0)];
  const double b = grid[std::min(best + 1, cells)];
  ScalarMinimum r = minimize_scalar(f, a, b, tol);
  r.iterations += cells + 1;
  if (vals[best] < r.value) {
    r.argmin = grid[best];
    r.value = vals[best];
  }
  return r;
}

}  // namespace

ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lower,
                              double upper, double tol, int max_iter) {
  if (!(lower < upper)) throw InvalidArgument("estimate", "minimize_scalar needs lower < upper");
  if (!(tol > 0.0)) throw InvalidArgument("estimate", "tolerance must be positive");
  const double rel = std::sqrt(std::numeric_limits<double>::epsilon());

  double a = lower;
  double b = upper;
  double x = a + kGolden * (b - a);
  double w = x;
  double v = x;
  double fx = checked_value(f(x), x);
  double fw = fx;
  double fv = fx;
  double f_lo_seen = fx;
  double f_hi_seen = fx;
  double d = 0.0;
  double e = 0.0;

  ScalarMinimum out;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = rel * std::abs(x) + tol / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) {
      out.converged = true;
      break;
    }
    bool golden = true;
    if (std::abs(e) > tol1) {
      // Parabola through (v, fv), (w, fw), (x, fx).
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < mid ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x < mid ? b : a) - x;
      d = kGolden * e;
    }
    double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    u = std::clamp(u, lower, upper);
    const double fu = checked_value(f(u), u);
    f_lo_seen = std::min(f_lo_seen, fu);
    f_hi_seen = std::max(f_hi_seen, fu);
    if (fu <= fx) {
      (u < x ? b : a) = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  out.iterations = iter + 1;
  if (f_lo_seen == f_hi_seen) {
    out.argmin = 0.5 * (lower + upper);
    out.value = checked_value(f(out.argmin), out.argmin);
    out.converged = true;
    return out;
  }
  out.argmin = x;
  out.value = fx;
  return out;
}

SimplexMinimum minimize_simplex(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x0, double scale, double tol,
                                int max_iter) {
  const std::size_t m = x0.size();
  if (m == 0) throw InvalidArgument("estimate", "empty starting point");
  if (max_iter <= 0) max_iter = 2000 * static_cast<int>(m);
  const auto eval = [&](const std::vector<double>& p) {
    const double v = f(p);
    if (!std::isfinite(v)) throw EvaluationError("estimate", "simplex cost is not finite");
    return v;
  };

  std::vector<std::vector<double>> pts(m + 1, std::vector<double>(x0.begin(), x0.end()));
  for (std::size_t i = 0; i < m; ++i) pts[i + 1][i] += scale;
  std::vector<double> vals(m + 1);
  for (std::size_t i = 0; i <= m; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(m + 1);
  SimplexMinimum out;
  int iter = 0;
  std::vector<double> centroid(m), trial(m), trial2(m);
  for (; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[m - 1];
    if (vals[worst] - vals[best] < tol) {
      out.converged = true;
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < m; ++k) centroid[k] += pts[i][k] / static_cast<double>(m);
    }
    for (std::size_t k = 0; k < m; ++k) trial[k] = centroid[k] + (centroid[k] - pts[worst][k]);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      for (std::size_t k = 0; k < m; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - pts[worst][k]);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection improved on the worst point.
    const bool outside = fr < vals[worst];
    for (std::size_t k = 0; k < m; ++k) {
      const double dir = outside ? (trial[k] - centroid[k]) : (pts[worst][k] - centroid[k]);
      trial2[k] = centroid[k] + 0.5 * dir;
    }
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < m; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
      vals[i] = eval(pts[i]);
    }
  }
  const auto best_it = std::min_element(vals.begin(), vals.end());
  const auto worst_it = std::max_element(vals.begin(), vals.end());
  out.argmin = pts[static_cast<std::size_t>(best_it - vals.begin())];
  out.value = *best_it;
  out.spread = *worst_it - *best_it;
  out.iterations = iter;
  return out;
}

Method parse_method(std::string_view name) {
  if (name == "exact-ml") return Method::exact_ml;
  if (name == "gauss1") return Method::gauss1;
  if (name == "gauss2") return Method::gauss2;
  if (name == "cmp") return Method::cmp;
  throw InvalidArgument("estimate", "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::exact_ml: return "exact-ml";
    case Method::gauss1: return "gauss1";
    case Method::gauss2: return "gauss2";
    case Method::cmp: return "cmp";
  }
  return "?";
}

double method_cost(Method method, const WienerModel& model_template,
                   std::span<const double> theta, std::span<const double> u,
                   std::span<const double> y, const QuadratureRule* rule, Execution exec) {
  switch (method) {
    case Method::exact_ml: {
      if (rule == nullptr) throw InvalidArgument("estimate", "exact ML needs a quadrature rule");
      WienerModel model = model_template;
      model.theta.assign(theta.begin(), theta.end());
      return exact_nll(model, u, y, *rule, exec);
    }
    case Method::gauss1: return gaussian_nll(meanvar_gauss1(model_template, theta, u), y);
    case Method::gauss2: return gaussian_nll(meanvar_gauss2(model_template, theta, u), y);
    case Method::cmp: return gaussian_nll(meanvar_cmp(model_template, theta, u), y);
  }
  throw InvalidArgument("estimate", "unknown method");
}

namespace {

// Interval around 0 whose image under h covers [ymin, ymax], if h is monotone
// there.
std::optional<Interval> covering_bracket(const PolynomialSensor& h, double ymin, double ymax) {
  for (double half = 1.0; half <= 1e6; half *= 2.0) {
    const Interval iv{-half, half};
    const double a = h.eval(iv.lower);
    const double b = h.eval(iv.upper);
    if (std::min(a, b) <= ymin && std::max(a, b) >= ymax) {
      if (h.is_strictly_monotone(iv)) return iv;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<double> scalar_seed(const PolynomialSensor& h, std::span<const double> u,
                                  std::span<const double> y, std::optional<Interval> domain) {
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const double ubar = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  if (ubar == 0.0) return std::nullopt;
  if (!domain) domain = covering_bracket(h, ybar, ybar);
  if (!domain || !h.is_strictly_monotone(*domain)) return std::nullopt;
  try {
    return h.inverse(ybar, *domain) / ubar;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<double> initial_theta(const WienerModel& model_template, std::span<const double> u,
                                  std::span<const double> y) {
  const std::size_t m = model_template.theta.size();
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const std::optional<Interval> iv = covering_bracket(model_template.sensor, *ymin, *ymax);
  if (!iv || m == 0 || u.size() < m) return model_template.theta;

  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(m));
  Eigen::VectorXd target(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    target[t] = model_template.sensor.inverse(y[t], *iv);
    for (std::size_t k = 0; k < m && static_cast<std::size_t>(t) >= k; ++k) {
      design(t, static_cast<Eigen::Index>(k)) = u[t - k];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(m)) return model_template.theta;
  const Eigen::VectorXd sol = qr.solve(target);
  return std::vector<double>(sol.data(), sol.data() + sol.size());
}

EstimateResult fit(const Dataset& data, const WienerModel& model_template, Method method,
                   const FitOptions& options) {
  data.validate();
  model_template.validate();
  const std::size_t m = model_template.theta.size();
  const std::span<const double> u = data.u;
  const std::span<const double> y = data.y;

  std::optional<QuadratureRule> rule;
  if (method == Method::exact_ml) rule = hermite_rule(options.gh_order);

  if (method == Method::exact_ml && !options.initial) {
    // Seed exact ML with the conditional-mean-predictor estimate.
    FitOptions seed_opts = options;
    const EstimateResult seed = fit(data, model_template, Method::cmp, seed_opts);
    FitOptions ml_opts = options;
    ml_opts.initial = seed.theta_hat;
    if (m == 1 && !options.half_width) {
      ml_opts.half_width = 0.25 * std::max(std::abs(seed.theta_hat[0]), 0.1);
    }
    EstimateResult r = fit(data, model_template, Method::exact_ml, ml_opts);
    r.iterations += seed.iterations;
    return r;
  }

  const QuadratureRule* rule_ptr = rule ? &*rule : nullptr;
  EstimateResult result;
  result.method = method;

  if (m == 1) {
    const auto cost = [&](double th) {
      const double theta[1] = {th};
      return method_cost(method, model_template, theta, u, y, rule_ptr, options.exec);
    };
    std::optional<double> start;
    if (options.initial) start = options.initial->at(0);

    double lo;
    double hi;
    bool free_lower = true;
    if (options.positive) {
      const double guess_upper = options.upper.value_or(0.0);
      if (!start) {
        const Interval domain{options.positive_floor,
                              guess_upper > options.positive_floor ? guess_upper : 1e3};
        start = scalar_seed(model_template.sensor, u, y, domain);
      }
      if (options.initial && options.half_width) {
        lo = std::max(options.positive_floor, *start - *options.half_width);
        hi = *start + *options.half_width;
        free_lower = lo > options.positive_floor;
      } else {
        lo = options.positive_floor;
        hi = options.upper.value_or(std::max(10.0, 4.0 * std::abs(start.value_or(1.0))));
        free_lower = false;
      }
      if (options.upper) hi = std::min(hi, *options.upper);
    } else {
      if (!start) start = scalar_seed(model_template.sensor, u, y, std::nullopt);
      const double centre = start.value_or(model_template.theta[0]);
      const double half = options.half_width.value_or(5.0 * std::max(1.0, std::abs(centre)));
      lo = centre - half;
      hi = centre + half;
      if (options.upper) hi = std::min(hi, *options.upper);
    }
    if (!(lo < hi)) throw InvalidArgument("estimate", "empty parameter bracket");

    ScalarMinimum best;
    if (method == Method::exact_ml) {
      // Narrow bracket around the seed; widen while the minimum sits on a
      // free edge.
      best = minimize_scalar(cost, lo, hi, options.scalar_tol);
      for (int widen = 0; widen < 6; ++widen) {
        const double margin = 1e-3 * (hi - lo);
        const bool at_lower = free_lower && best.argmin - lo < margin;
        const bool at_upper = hi - best.argmin < margin &&
                              !(options.upper && hi >= *options.upper);
        if (!at_lower && !at_upper) break;
        const double width = hi - lo;
        if (at_lower) lo -= 2.0 * width;
        if (at_upper) hi += 2.0 * width;
        if (options.positive && lo <= options.positive_floor) {
          lo = options.positive_floor;
          free_lower = false;
        }
        if (options.upper) hi = std::min(hi, *options.upper);
        const ScalarMinimum again = minimize_scalar(cost, lo, hi, options.scalar_tol);
        const int used = best.iterations;
        best = again;
        best.iterations += used;
      }
    } else {
      best = scan_then_refine(cost, lo, hi, options.scalar_tol, 40);
    }
    result.theta_hat = {best.argmin};
    result.cost = best.value;
    result.iterations = best.iterations;
    result.converged = best.converged;
    result.bracket = Interval{lo, hi};
    return result;
  }

  const std::vector<double> x0 =
      options.initial ? *options.initial : initial_theta(model_template, u, y);
  double inf_norm = 0.0;
  for (double v : x0) inf_norm = std::max(inf_norm, std::abs(v));
  const auto cost = [&](std::span<const double> th) {
    return method_cost(method, model_template, th, u, y, rule_ptr, options.exec);
  };
  const SimplexMinimum sm = minimize_simplex(cost, x0, 0.1 * std::max(1.0, inf_norm),
                                             options.simplex_tol,
                                             options.max_iter > 0 ? options.max_iter
                                                                  : 2000 * static_cast<int>(m));
  result.theta_hat = sm.argmin;
  result.cost = sm.value;
  result.iterations = sm.iterations;
  result.converged = sm.converged;
  result.simplex_spread = sm.spread;
  return result;
}

}  // namespace wienerlab
