#include "retrovert/allpass.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "retrovert/error.hpp"
#include "retrovert/kernels.hpp"

namespace retrovert {

namespace {

using cd = std::complex<double>;

// F = S^{-1} A S and G = S^{-1} B with S lower triangular.
void normalize(AllPassExtension& ext) {
  const auto L = ext.gramian.S.triangularView<Eigen::Lower>();
  ext.F = L.solve(ext.A * ext.gramian.S);
  ext.G = L.solve(ext.B);
}

bool is_infinite(cd z) { return !std::isfinite(z.real()) || !std::isfinite(z.imag()); }

ComplexMatrix cplx(const Matrix& M) { return M.cast<cd>(); }

double unitarity_defect(const ComplexMatrix& U) {
  const Eigen::Index p = U.rows();
  const ComplexMatrix I = ComplexMatrix::Identity(p, p);
  const double left = (U * U.adjoint() - I).norm();
  const double right = (U.adjoint() * U - I).norm();
  return std::max(left, right);
}

}  // namespace

AllPassExtension build_allpass_discrete(const Matrix& A, const Matrix& B) {
  AllPassExtension ext;
  ext.time_domain = TimeDomain::kDiscrete;
  ext.gramian = solve_discrete_lyapunov(A, B);
  ext.A = A;
  ext.B = B;
  normalize(ext);

  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  Matrix top(n, n + p);
  top << ext.F, ext.G;
  const Matrix bottom = orthogonal_complete(top);
  ext.H = bottom.leftCols(n);
  ext.J = bottom.rightCols(p);
  // Bbar = S^{-T} H'
  ext.Bbar = ext.gramian.S.transpose().triangularView<Eigen::Upper>().solve(
      ext.H.transpose());
  return ext;
}

AllPassExtension build_allpass_continuous(const Matrix& A, const Matrix& B) {
  AllPassExtension ext;
  ext.time_domain = TimeDomain::kContinuous;
  ext.gramian = solve_continuous_lyapunov(A, B);
  ext.A = A;
  ext.B = B;
  normalize(ext);
  ext.H = -ext.G.transpose();
  ext.J = Matrix::Identity(B.cols(), B.cols());
  ext.Bbar = ext.gramian.Pinv * B;
  return ext;
}

AllPassExtension build_allpass(TimeDomain domain, const Matrix& A, const Matrix& B) {
  return domain == TimeDomain::kDiscrete ? build_allpass_discrete(A, B)
                                         : build_allpass_continuous(A, B);
}

AllPassExtension apply_gauge(const AllPassExtension& ext, const Matrix& O) {
  const Eigen::Index p = ext.inputs();
  if (O.rows() != p || O.cols() != p) {
    throw DimensionMismatch("apply_gauge: O must be p x p");
  }
  AllPassExtension out = ext;
  out.H = O * ext.H;
  out.J = O * ext.J;
  if (ext.time_domain == TimeDomain::kDiscrete) {
    out.Bbar = ext.Bbar * O.transpose();
  }
  return out;
}

ComplexMatrix eval_structural(const AllPassExtension& ext, cd point) {
  return eval_structural_signed(ext, point, OutputSign::kMinus);
}

ComplexMatrix eval_structural_signed(const AllPassExtension& ext, cd point,
                                     OutputSign sign) {
  const Eigen::Index p = ext.inputs();
  if (ext.time_domain == TimeDomain::kDiscrete) {
    if (is_infinite(point)) return cplx(ext.J);
    return cplx(ext.Bbar.transpose()) * resolvent_solve(ext.A, point, ext.B) + cplx(ext.J);
  }
  const double s = sign == OutputSign::kMinus ? -1.0 : 1.0;
  ComplexMatrix inner = ComplexMatrix::Identity(p, p);
  if (!is_infinite(point)) {
    inner += s * cplx(ext.Bbar.transpose()) * resolvent_solve(ext.A, point, ext.B);
  }
  return cplx(ext.J) * inner;
}

ComplexMatrix eval_structural_normalized(const AllPassExtension& ext, cd point) {
  if (is_infinite(point)) return cplx(ext.J);
  return cplx(ext.H) * resolvent_solve(ext.F, point, ext.G) + cplx(ext.J);
}

ComplexMatrix eval_structural_adjoint(const AllPassExtension& ext, cd point) {
  const Eigen::Index p = ext.inputs();
  const Matrix At = ext.A.transpose();
  if (ext.time_domain == TimeDomain::kDiscrete) {
    const cd w = cd(1.0) / point;
    if (is_infinite(w)) return cplx(ext.J.transpose());
    return cplx(ext.B.transpose()) * resolvent_solve(At, w, ext.Bbar) +
           cplx(ext.J.transpose());
  }
  ComplexMatrix inner = ComplexMatrix::Identity(p, p);
  if (!is_infinite(point)) {
    // (sI + A')^{-1} = resolvent of -A' at s
    inner += cplx(ext.B.transpose()) * resolvent_solve(-At, point, ext.Bbar);
  }
  return inner * cplx(ext.J.transpose());
}

std::vector<cd> unit_circle_grid(std::size_t n) {
  std::vector<cd> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    z[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) /
                               static_cast<double>(n));
  }
  return z;
}

std::vector<cd> imaginary_axis_grid(const Matrix& A, std::size_t log_points) {
  const double rho = std::abs(spectral_abscissa(A));
  const double scale = rho > 0.0 ? rho : 1.0;
  std::vector<cd> s;
  s.reserve(log_points + 1);
  s.emplace_back(0.0, 0.0);
  for (std::size_t j = 0; j < log_points; ++j) {
    const double e = log_points == 1 ? 0.0
                                     : -3.0 + 6.0 * static_cast<double>(j) /
                                                  static_cast<double>(log_points - 1);
    s.emplace_back(0.0, scale * std::pow(10.0, e));
  }
  return s;
}

std::vector<cd> boundary_grid(TimeDomain domain, const Matrix& A, std::size_t grid_size) {
  return domain == TimeDomain::kDiscrete ? unit_circle_grid(grid_size)
                                         : imaginary_axis_grid(A, grid_size);
}

namespace {

template <bool Parallel>
double allpass_sweep(const AllPassExtension& ext, std::size_t grid_size, OutputSign sign) {
  if (grid_size < 2) throw Error("check_allpass_grid: grid size must be at least 2");
  const auto grid = boundary_grid(ext.time_domain, ext.A, grid_size);
  auto deviation = [&](cd z) -> std::optional<double> {
    try {
      return unitarity_defect(eval_structural_signed(ext, z, sign));
    } catch (const SingularResolvent&) {
      return std::nullopt;
    }
  };
  kernels::SweepResult r;
  if constexpr (Parallel) {
    r = kernels::sweep_max(std::span<const cd>(grid), deviation);
  } else {
    r = kernels::sweep_max_reference(std::span<const cd>(grid), deviation);
  }
  // A stable A has no poles on the boundary, so a skipped point is a failure.
  return r.skipped > 0 ? std::numeric_limits<double>::infinity() : r.max_deviation;
}

}  // namespace

double check_allpass_grid(const AllPassExtension& ext, std::size_t grid_size, OutputSign sign) {
  return allpass_sweep<true>(ext, grid_size, sign);
}

double check_allpass_grid_reference(const AllPassExtension& ext, std::size_t grid_size) {
  return allpass_sweep<false>(ext, grid_size, OutputSign::kMinus);
}

double embedding_defect(const AllPassExtension& ext) {
  const Eigen::Index n = ext.states();
  const Eigen::Index p = ext.inputs();
  if (ext.time_domain == TimeDomain::kContinuous) {
    return (ext.F + ext.F.transpose() + ext.G * ext.G.transpose()).norm();
  }
  Matrix U(n + p, n + p);
  U << ext.F, ext.G, ext.H, ext.J;
  const Matrix I = Matrix::Identity(n + p, n + p);
  return std::max((U.transpose() * U - I).norm(), (U * U.transpose() - I).norm());
}

double backward_gramian_residual(const AllPassExtension& ext) {
  const Matrix& Q = ext.gramian.Pinv;
  const Matrix BB = ext.Bbar * ext.Bbar.transpose();
  if (ext.time_domain == TimeDomain::kDiscrete) {
    return (Q - ext.A.transpose() * Q * ext.A - BB).norm();
  }
  return (ext.A.transpose() * Q + Q * ext.A + BB).norm();
}

}  // namespace retrovert
