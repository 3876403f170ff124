#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wienerlab/estimate.hpp"
#include "wienerlab/fisher.hpp"

namespace wienerlab {

// splitmix64 finalizer; realization r of a run is simulated with
// base_seed ^ splitmix64(r).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t realization_seed(std::uint64_t base_seed, std::uint64_t r);

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct MonteCarloConfig {
  WienerModel model;  // truth
  Method method = Method::exact_ml;
  std::size_t samples = 1000;
  std::size_t realizations = 250;
  std::uint64_t base_seed = kDefaultSeed;
  int gh_order = kDefaultLikelihoodOrder;
  bool positive = false;
  // Input sequence; empty means a constant input of 1.
  std::vector<double> input;
  // Model assumed by the estimator; defaults to the truth.
  std::optional<WienerModel> assumed;
  // Realizations run concurrently under `parallel`; each fit is serial.
  Execution exec = Execution::parallel;
};

struct MonteCarloReport {
  // Successful estimates in realization order.
  std::vector<std::vector<double>> estimates;
  std::vector<std::size_t> failed;  // realization indices
  std::vector<double> sample_mean;
  std::vector<double> sample_std;  // R - 1 denominator
  std::vector<double> bias;
  // √(ascov / N) of the Gaussian criterion, when one applies.
  std::optional<std::vector<double>> theory_std;
  double runtime_seconds = 0.0;
};

// Throws HarnessError when more than 5% of the fits fail.
MonteCarloReport monte_carlo(const MonteCarloConfig& config);

enum class Table1Row { linear, quadratic, ml2, cubic, ml3 };

Table1Row parse_table1_row(std::string_view name);
std::string_view to_string(Table1Row row);

struct Table1Options {
  std::vector<Table1Row> rows = {Table1Row::linear, Table1Row::quadratic, Table1Row::ml2,
                                 Table1Row::cubic, Table1Row::ml3};
  std::size_t samples = 1000;
  std::size_t realizations = 250;
  int gh_order = kDefaultLikelihoodOrder;
  // Adds the printed-variant value under each Quadratic/Cubic cell.
  bool printed_variant = false;
  std::uint64_t seed = kDefaultSeed;
  Execution exec = Execution::parallel;
};

struct Table1Line {
  std::string label;
  std::vector<double> values;
  // κ range over the row (asymptotic rows only).
  std::optional<double> kappa_min;
  std::optional<double> kappa_max;
};

struct Table1 {
  std::vector<double> noise_levels;  // σ_v^2 = σ_e^2
  std::vector<Table1Line> lines;
};

inline const std::vector<double> kTable1NoiseLevels = {0.1, 0.25, 0.5, 0.75, 1.0};

// Constant-mean model y = h(m + v) + e, m = 1, σ_e = σ_v.
Table1 table1(const Table1Options& options = {});

// Normalized standard deviation of the asymptotic rows at one noise level.
double linear_row_std(double var, std::size_t samples);
double sensor_row_std(const PolynomialSensor& sensor, double var, std::size_t samples,
                      bool printed_variant);

struct ConsistencyOptions {
  std::size_t samples = 10000;
  std::size_t realizations = 500;
  std::uint64_t seed = kDefaultSeed;
  KappaSource kappa = KappaSource::true_residual;
  // Force κ_t = 1 in the theory, i.e. ignore the non-Gaussian correction.
  bool kappa_one = false;
  Execution exec = Execution::parallel;
};

struct ConsistencyReport {
  double sample_std = 0.0;
  double theory_std = 0.0;  // √(ascov / N)
  // The same without the residual-skewness term in J.
  double theory_std_kappa_only = 0.0;
  double ratio = 0.0;       // √N · sample_std / √ascov
  MonteCarloReport monte_carlo;
};

// Scalar models only. The fit is restricted to θ > 0 when θ_o > 0.
ConsistencyReport consistency_check(const WienerModel& model, MeanVarKind kind,
                                    const ConsistencyOptions& options = {});

}  // namespace wienerlab
