#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a plain serial reference kept for tests and the benchmark.
// Results never depend on the thread count: sweeps reduce with max, and the
// lag kernels give every lag to exactly one thread.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "retrovert/matops.hpp"

namespace retrovert::kernels {

struct SweepResult {
  double max_deviation = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

namespace detail {

inline double sanitize(double v) {
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

}  // namespace detail

/// Evaluates fn at every point and returns the largest value. fn returns
/// std::nullopt for points that must be skipped; it must not throw.
template <class Fn>
SweepResult sweep_max_reference(std::span<const std::complex<double>> points, Fn&& fn) {
  SweepResult r;
  for (const auto& z : points) {
    const std::optional<double> v = fn(z);
    if (!v) {
      ++r.skipped;
      continue;
    }
    ++r.evaluated;
    r.max_deviation = std::max(r.max_deviation, detail::sanitize(*v));
  }
  return r;
}

template <class Fn>
SweepResult sweep_max(std::span<const std::complex<double>> points, Fn&& fn) {
  const long long count = static_cast<long long>(points.size());
  double worst = 0.0;
  long long evaluated = 0;
  long long skipped = 0;
#pragma omp parallel for schedule(static) reduction(max : worst) reduction(+ : evaluated, skipped)
  for (long long i = 0; i < count; ++i) {
    const std::optional<double> v = fn(points[static_cast<std::size_t>(i)]);
    if (!v) {
      ++skipped;
      continue;
    }
    ++evaluated;
    worst = std::max(worst, detail::sanitize(*v));
  }
  return {worst, static_cast<std::size_t>(evaluated), static_cast<std::size_t>(skipped)};
}

/// Biased cross-covariance (1/N) sum_t a(t) b(t-k)' for k = min_lag..max_lag.
/// Rows of a and b are time steps; both must have N rows. Entry [k - min_lag]
/// of the result is the lag-k matrix (a.cols() x b.cols()).
std::vector<Matrix> cross_covariance_reference(const Matrix& a, const Matrix& b,
                                               int min_lag, int max_lag);
std::vector<Matrix> cross_covariance(const Matrix& a, const Matrix& b,
                                     int min_lag, int max_lag);

/// Biased autocovariance (1/N) sum_t s(t+k) s(t)' for k = 0..max_lag.
inline std::vector<Matrix> autocovariance_reference(const Matrix& seq, int max_lag) {
  return cross_covariance_reference(seq, seq, 0, max_lag);
}
inline std::vector<Matrix> autocovariance(const Matrix& seq, int max_lag) {
  return cross_covariance(seq, seq, 0, max_lag);
}

}  // namespace retrovert::kernels
