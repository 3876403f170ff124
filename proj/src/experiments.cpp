#include "wienerlab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "wienerlab/errors.hpp"

namespace wienerlab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t r) {
  return base_seed ^ splitmix64(r);
}

namespace {

std::optional<MeanVarKind> criterion_kind(Method method) {
  switch (method) {
    case Method::gauss1: return MeanVarKind::gauss1;
    case Method::gauss2: return MeanVarKind::gauss2;
    case Method::cmp: return MeanVarKind::cmp;
    case Method::exact_ml: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

MonteCarloReport monte_carlo(const MonteCarloConfig& config) {
  config.model.validate();
  if (config.samples < 1 || config.realizations < 1) {
    throw InvalidArgument("experiments", "need at least one sample and one realization");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> u = config.input.empty()
                                    ? constant_input(config.samples)
                                    : config.input;
  if (u.size() != config.samples) {
    throw InvalidArgument("experiments", "input length differs from the sample count");
  }
  const WienerModel& assumed = config.assumed ? *config.assumed : config.model;
  const std::size_t m = config.model.theta.size();

  FitOptions fit_options;
  fit_options.positive = config.positive;
  fit_options.gh_order = config.gh_order;
  fit_options.exec = Execution::serial;

  const std::size_t R = config.realizations;
  std::vector<std::vector<double>> slots(R);
  std::vector<char> ok(R, 0);
  kernels::for_each_index(config.exec, R, [&](std::size_t r) {
    const Dataset data = simulate(config.model, u, realization_seed(config.base_seed, r));
    try {
      EstimateResult est = fit(data, assumed, config.method, fit_options);
      if (est.converged) {
        slots[r] = std::move(est.theta_hat);
        ok[r] = 1;
      }
    } catch (const Error&) {
      // Counted below.
    }
  });

  MonteCarloReport report;
  for (std::size_t r = 0; r < R; ++r) {
    if (ok[r]) {
      report.estimates.push_back(std::move(slots[r]));
    } else {
      report.failed.push_back(r);
    }
  }
  if (20 * report.failed.size() > R) {
    throw HarnessError("experiments", std::to_string(report.failed.size()) + " of " +
                                          std::to_string(R) + " fits failed");
  }

  // Mean as an offset from the first estimate, so identical estimates give a
  // mean equal to them and a zero std.
  const std::size_t n = report.estimates.size();
  report.sample_mean.assign(m, 0.0);
  report.sample_std.assign(m, 0.0);
  report.bias.assign(m, 0.0);
  for (std::size_t k = 0; k < m && n > 0; ++k) {
    const double ref = report.estimates.front()[k];
    double shift = 0.0;
    for (const auto& e : report.estimates) shift += e[k] - ref;
    const double mean = ref + shift / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& e : report.estimates) ss += (e[k] - mean) * (e[k] - mean);
    report.sample_mean[k] = mean;
    report.sample_std[k] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    report.bias[k] = mean - config.model.theta[k];
  }

  if (const auto kind = criterion_kind(config.method)) {
    try {
      const FisherReport fr = fisher_report(assumed, config.model.theta, u, *kind);
      std::vector<double> theory(m);
      for (std::size_t k = 0; k < m; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        theory[k] = std::sqrt(fr.ascov(kk, kk) / static_cast<double>(config.samples));
      }
      report.theory_std = std::move(theory);
    } catch (const Error&) {
      // No finite theory for a degenerate configuration.
    }
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Table1Row parse_table1_row(std::string_view name) {
  if (name == "linear") return Table1Row::linear;
  if (name == "quadratic") return Table1Row::quadratic;
  if (name == "ml2") return Table1Row::ml2;
  if (name == "cubic") return Table1Row::cubic;
  if (name == "ml3") return Table1Row::ml3;
  throw InvalidArgument("experiments", "unknown table row '" + std::string(name) + "'");
}

std::string_view to_string(Table1Row row) {
  switch (row) {
    case Table1Row::linear: return "Linear";
    case Table1Row::quadratic: return "Quadratic";
    case Table1Row::ml2: return "ML2";
    case Table1Row::cubic: return "Cubic";
    case Table1Row::ml3: return "ML3";
  }
  return "?";
}

double linear_row_std(double var, std::size_t samples) {
  return std::sqrt(2.0 * var / static_cast<double>(samples));
}

double sensor_row_std(const PolynomialSensor& sensor, double var, std::size_t samples,
                      bool printed_variant) {
  ScalarFisherOptions opts;
  opts.printed_variant = printed_variant;
  const FisherReport fr = fim_result4(sensor, 1.0, var, var, opts);
  return std::sqrt(fr.ascov(0, 0) / static_cast<double>(samples));
}

Table1 table1(const Table1Options& options) {
  Table1 table;
  table.noise_levels = kTable1NoiseLevels;
  const auto& levels = table.noise_levels;

  const auto asymptotic_line = [&](const PolynomialSensor& sensor, std::string label,
                                   bool variant) {
    Table1Line line{std::move(label), {}, {}, {}};
    for (double var : levels) {
      ScalarFisherOptions opts;
      opts.printed_variant = variant;
      const FisherReport fr = fim_result4(sensor, 1.0, var, var, opts);
      line.values.push_back(std::sqrt(fr.ascov(0, 0) / static_cast<double>(options.samples)));
      line.kappa_min = std::min(line.kappa_min.value_or(fr.kappa_min), fr.kappa_min);
      line.kappa_max = std::max(line.kappa_max.value_or(fr.kappa_max), fr.kappa_max);
    }
    return line;
  };
  const auto ml_line = [&](const PolynomialSensor& sensor, std::string label) {
    Table1Line line{std::move(label), {}, {}, {}};
    for (double var : levels) {
      MonteCarloConfig cfg;
      cfg.model = WienerModel{{1.0}, sensor, var, var};
      cfg.method = Method::exact_ml;
      cfg.samples = options.samples;
      cfg.realizations = options.realizations;
      cfg.base_seed = options.seed;
      cfg.gh_order = options.gh_order;
      cfg.positive = true;
      cfg.exec = options.exec;
      line.values.push_back(monte_carlo(cfg).sample_std[0]);
    }
    return line;
  };

  for (Table1Row row : options.rows) {
    const std::string label(to_string(row));
    switch (row) {
      case Table1Row::linear: {
        Table1Line line{label, {}, {}, {}};
        for (double var : levels) line.values.push_back(linear_row_std(var, options.samples));
        table.lines.push_back(std::move(line));
        break;
      }
      case Table1Row::quadratic:
      case Table1Row::cubic: {
        const PolynomialSensor sensor = row == Table1Row::quadratic
                                            ? PolynomialSensor::quadratic()
                                            : PolynomialSensor::cubic();
        table.lines.push_back(asymptotic_line(sensor, label, false));
        if (options.printed_variant) {
          table.lines.push_back(asymptotic_line(sensor, label + " (printed variant)", true));
        }
        break;
      }
      case Table1Row::ml2:
        table.lines.push_back(ml_line(PolynomialSensor::quadratic(), label));
        break;
      case Table1Row::ml3:
        table.lines.push_back(ml_line(PolynomialSensor::cubic(), label));
        break;
    }
  }
  return table;
}

ConsistencyReport consistency_check(const WienerModel& model, MeanVarKind kind,
                                    const ConsistencyOptions& options) {
  model.validate();
  if (model.theta.size() != 1) {
    throw InvalidArgument("experiments", "consistency check needs a scalar model");
  }
  MonteCarloConfig cfg;
  cfg.model = model;
  switch (kind) {
    case MeanVarKind::gauss1: cfg.method = Method::gauss1; break;
    case MeanVarKind::gauss2: cfg.method = Method::gauss2; break;
    case MeanVarKind::cmp: cfg.method = Method::cmp; break;
  }
  cfg.samples = options.samples;
  cfg.realizations = options.realizations;
  cfg.base_seed = options.seed;
  cfg.positive = model.theta[0] > 0.0;
  cfg.exec = options.exec;

  ConsistencyReport report;
  report.monte_carlo = monte_carlo(cfg);

  FisherOptions fopts;
  fopts.kappa = options.kappa;
  if (options.kappa_one) fopts.kappa_override = 1.0;
  const std::vector<double> u = constant_input(options.samples);
  const FisherReport fr = fisher_report(model, model.theta, u, kind, fopts);
  const double ascov = fr.ascov(0, 0);
  const double n = static_cast<double>(options.samples);
  report.sample_std = report.monte_carlo.sample_std[0];
  report.theory_std = std::sqrt(ascov / n);
  report.ratio = std::sqrt(n) * report.sample_std / std::sqrt(ascov);
  fopts.third_moment = false;
  report.theory_std_kappa_only =
      std::sqrt(fisher_report(model, model.theta, u, kind, fopts).ascov(0, 0) / n);
  return report;
}

}  // namespace wienerlab
