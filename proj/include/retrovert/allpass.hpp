#pragma once

#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

#include "retrovert/matops.hpp"
#include "retrovert/model.hpp"

namespace retrovert {

/// Describes how (H, J) are fixed, so reports from different builds can be
/// reconciled.
inline constexpr std::string_view kDiscreteGauge =
    "cholesky-lower; householder-qr complement; first nonzero entry of each new row positive";
inline constexpr std::string_view kContinuousGauge = "cholesky-lower; J = I; H = -G'";

/// Lossless (all-pass) completion of the state dynamics of (A, B).
///
/// With P = S S' the Gramian, the normalized coordinates xi = S^{-1} x give
/// F = S^{-1} A S and G = S^{-1} B. The completion adds (H, J) so that
///
///   discrete:   [[F, G], [H, J]] is orthogonal,
///   continuous: H = -J G', with F + F' + G G' = 0 and J = I by default.
///
/// In x-coordinates the structural function is
///   discrete:   U(z) = Bbar' (zI - A)^{-1} B + J,     Bbar = S^{-T} H'
///   continuous: U(s) = J (I - Bbar' (sI - A)^{-1} B), Bbar = P^{-1} B
struct AllPassExtension {
  TimeDomain time_domain = TimeDomain::kDiscrete;
  GramianFactorization gramian;
  Matrix A;
  Matrix B;
  Matrix F;
  Matrix G;
  Matrix H;
  Matrix J;
  Matrix Bbar;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
};

AllPassExtension build_allpass_discrete(const Matrix& A, const Matrix& B);
AllPassExtension build_allpass_continuous(const Matrix& A, const Matrix& B);
AllPassExtension build_allpass(TimeDomain domain, const Matrix& A, const Matrix& B);

/// Replaces (H, J) by (O H, O J) for orthogonal O and updates Bbar to match.
AllPassExtension apply_gauge(const AllPassExtension& ext, const Matrix& O);

/// U at a point of the complex plane, computed from (A, B, Bbar, J).
/// Throws SingularResolvent near the poles. Infinite points return the limit.
ComplexMatrix eval_structural(const AllPassExtension& ext, std::complex<double> point);

/// U computed from the normalized coordinates, H (zI - F)^{-1} G + J.
ComplexMatrix eval_structural_normalized(const AllPassExtension& ext,
                                         std::complex<double> point);

/// The inverse (adjoint) system:
///   discrete:   U*(z) = B' (z^{-1} I - A')^{-1} Bbar + J'
///   continuous: U*(s) = (I + B' (sI + A')^{-1} Bbar) J'
ComplexMatrix eval_structural_adjoint(const AllPassExtension& ext,
                                      std::complex<double> point);

/// Sign used for the continuous-time output map dubar = du -/+ Bbar' x dt.
/// kPlus exists only so the verify report can show that it is not all-pass.
enum class OutputSign { kMinus, kPlus };

/// Continuous U with an explicit output-map sign; kMinus equals eval_structural.
ComplexMatrix eval_structural_signed(const AllPassExtension& ext,
                                     std::complex<double> s, OutputSign sign);

/// z_k = exp(2 pi i k / n), k = 0..n-1.
std::vector<std::complex<double>> unit_circle_grid(std::size_t n);

/// s = i w with w = 0 followed by `log_points` log-spaced values in
/// [1e-3 rho, 1e3 rho], rho = |spectral abscissa of A|.
std::vector<std::complex<double>> imaginary_axis_grid(const Matrix& A, std::size_t log_points);

inline constexpr std::size_t kDefaultDiscreteGrid = 512;
inline constexpr std::size_t kDefaultContinuousGrid = 61;

/// Grid for the given domain: unit circle with grid_size points, or the
/// imaginary-axis grid with grid_size log-spaced points plus DC.
std::vector<std::complex<double>> boundary_grid(TimeDomain domain, const Matrix& A,
                                                std::size_t grid_size);

/// max over the boundary grid of max(||U U^H - I||_F, ||U^H U - I||_F).
/// Throws Error when grid_size < 2.
double check_allpass_grid(const AllPassExtension& ext, std::size_t grid_size,
                          OutputSign sign = OutputSign::kMinus);
double check_allpass_grid_reference(const AllPassExtension& ext, std::size_t grid_size);

/// Discrete: max(||U'U - I||_F, ||UU' - I||_F) for U = [[F, G], [H, J]].
/// Continuous: ||F + F' + G G'||_F.
double embedding_defect(const AllPassExtension& ext);

/// Discrete: ||Pinv - A' Pinv A - Bbar Bbar'||_F.
/// Continuous: ||A' Pinv + Pinv A + Bbar Bbar'||_F.
double backward_gramian_residual(const AllPassExtension& ext);

}  // namespace retrovert
