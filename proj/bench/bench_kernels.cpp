// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "wienerlab/experiments.hpp"

using namespace wienerlab;

namespace {

Dataset cubic_data(std::size_t n, std::vector<double>& u) {
  u.resize(n);
  for (std::size_t t = 0; t < n; ++t) u[t] = std::sin(0.01 * static_cast<double>(t));
  const WienerModel model{{1.0, 0.5}, PolynomialSensor::cubic(), 0.5, 0.5};
  return simulate(model, u, 7);
}

void exact_nll_bench(benchmark::State& state, Execution exec) {
  std::vector<double> u;
  const Dataset data = cubic_data(static_cast<std::size_t>(state.range(0)), u);
  const WienerModel model{{1.0, 0.5}, PolynomialSensor::cubic(), 0.5, 0.5};
  const QuadratureRule rule = hermite_rule(kDefaultLikelihoodOrder);
  for (auto _ : state) benchmark::DoNotOptimize(exact_nll(model, u, data.y, rule, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void monte_carlo_bench(benchmark::State& state, Execution exec) {
  MonteCarloConfig cfg;
  cfg.model = WienerModel{{1.0}, PolynomialSensor::quadratic(), 0.5, 0.5};
  cfg.method = Method::cmp;
  cfg.samples = 1000;
  cfg.realizations = static_cast<std::size_t>(state.range(0));
  cfg.positive = true;
  cfg.exec = exec;
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo(cfg).sample_std);
}

}  // namespace

BENCHMARK_CAPTURE(exact_nll_bench, serial, Execution::serial)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(exact_nll_bench, parallel, Execution::parallel)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(monte_carlo_bench, serial, Execution::serial)->Arg(64);
BENCHMARK_CAPTURE(monte_carlo_bench, parallel, Execution::parallel)->Arg(64);

BENCHMARK_MAIN();
