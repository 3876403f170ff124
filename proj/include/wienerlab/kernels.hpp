#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "wienerlab/quadrature.hpp"
#include "wienerlab/sensor.hpp"

namespace wienerlab {

// Every data-parallel kernel exists twice: a plain serial loop kept as the
// reference, and an OpenMP version. Both write per-index results into
// caller-owned storage and any reduction happens afterwards in index order,
// so the two paths agree bit for bit.
enum class Execution { serial, parallel };

// Caps OpenMP threads; 0 restores the runtime default.
void set_thread_limit(int threads);
int thread_limit();

namespace kernels {

// out[t] = log E_v{ N(y_t; h(z_t + v), var_e) },  v ~ N(0, var_v).
void log_marginal_serial(const PolynomialSensor& sensor, std::span<const double> z,
                         std::span<const double> y, double var_v, double var_e,
                         const QuadratureRule& rule, std::span<double> out);
void log_marginal_parallel(const PolynomialSensor& sensor, std::span<const double> z,
                           std::span<const double> y, double var_v, double var_e,
                           const QuadratureRule& rule, std::span<double> out);

// Calls fn(i) for i in [0, n). The parallel version schedules dynamically;
// fn must only write to index-owned state. The first exception thrown by
// any fn is rethrown after the loop.
void for_each_index_serial(std::size_t n, const std::function<void(std::size_t)>& fn);
void for_each_index_parallel(std::size_t n, const std::function<void(std::size_t)>& fn);

inline void for_each_index(Execution exec, std::size_t n,
                           const std::function<void(std::size_t)>& fn) {
  if (exec == Execution::parallel) {
    for_each_index_parallel(n, fn);
  } else {
    for_each_index_serial(n, fn);
  }
}

}  // namespace kernels
}  // namespace wienerlab
