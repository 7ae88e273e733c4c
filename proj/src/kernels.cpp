#include "retrovert/kernels.hpp"

#include <algorithm>

#include "retrovert/error.hpp"

namespace retrovert::kernels {

namespace {

void check_shapes(const Matrix& a, const Matrix& b, int min_lag, int max_lag) {
  if (a.rows() != b.rows()) {
    throw DimensionMismatch("cross_covariance: sequences have different lengths");
  }
  if (min_lag > max_lag) {
    throw DimensionMismatch("cross_covariance: empty lag range");
  }
}

// Rows t with both t and t - k inside [0, N).
std::pair<Eigen::Index, Eigen::Index> overlap(Eigen::Index N, int k) {
  const Eigen::Index first = std::max<Eigen::Index>(0, k);
  const Eigen::Index last = std::min<Eigen::Index>(N, N + k);
  return {first, std::max(first, last)};
}

Matrix lag_block(const Matrix& a, const Matrix& b, int k) {
  const Eigen::Index N = a.rows();
  const auto [first, last] = overlap(N, k);
  const Eigen::Index len = last - first;
  Matrix out(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      out(i, j) = len > 0 ? a.col(i).segment(first, len).dot(b.col(j).segment(first - k, len))
                          : 0.0;
    }
  }
  return out / static_cast<double>(N);
}

}  // namespace

std::vector<Matrix> cross_covariance_reference(const Matrix& a, const Matrix& b,
                                               int min_lag, int max_lag) {
  check_shapes(a, b, min_lag, max_lag);
  const Eigen::Index N = a.rows();
  std::vector<Matrix> out;
  for (int k = min_lag; k <= max_lag; ++k) {
    Matrix c = Matrix::Zero(a.cols(), b.cols());
    const auto [first, last] = overlap(N, k);
    for (Eigen::Index t = first; t < last; ++t) {
      for (Eigen::Index i = 0; i < a.cols(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
          c(i, j) += a(t, i) * b(t - k, j);
        }
      }
    }
    out.push_back(c / static_cast<double>(N));
  }
  return out;
}

std::vector<Matrix> cross_covariance(const Matrix& a, const Matrix& b, int min_lag,
                                     int max_lag) {
  check_shapes(a, b, min_lag, max_lag);
  const int count = max_lag - min_lag + 1;
  std::vector<Matrix> out(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (int idx = 0; idx < count; ++idx) {
    out[static_cast<std::size_t>(idx)] = lag_block(a, b, min_lag + idx);
  }
  return out;
}

}  // namespace retrovert::kernels
