#pragma once

// Dense kernels shared by every other module: Lyapunov solves, the
// orthogonal completion, spectra, reachability and the matrix exponential.

#include <complex>

#include <Eigen/Dense>

namespace retrovert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Stability margin applied to the spectral radius (discrete) and the
/// spectral abscissa (continuous).
inline constexpr double kStabilityMargin = 1e-8;

/// Largest state dimension accepted by the Kronecker Lyapunov solvers.
inline constexpr Eigen::Index kMaxStateDimension = 64;

/// Row-orthonormality tolerance demanded from the input of orthogonal_complete.
inline constexpr double kCoisometryTolerance = 1e-10;

/// Stationary state covariance together with a Cholesky factor and inverse.
///
/// P is stored exactly symmetric. S is lower triangular with a nonnegative
/// diagonal and satisfies P = S S'.
struct GramianFactorization {
  Matrix P;
  Matrix S;
  Matrix Pinv;
};

/// Solves P = A P A' + B B' for a Schur-stable A.
///
/// Throws UnstableMatrix when the spectral radius is at least 1 - margin and
/// SingularGramian when P is not numerically positive definite.
GramianFactorization solve_discrete_lyapunov(const Matrix& A, const Matrix& B);

/// Solves A P + P A' + B B' = 0 for a Hurwitz A. Errors as above.
GramianFactorization solve_continuous_lyapunov(const Matrix& A,
                                               const Matrix& B);

/// Relative residuals ||P - APA' - BB'||_F / (1 + ||P||_F) and
/// ||AP + PA' + BB'||_F / (1 + ||P||_F).
double discrete_lyapunov_residual(const Matrix& A, const Matrix& B,
                                  const Matrix& P);
double continuous_lyapunov_residual(const Matrix& A, const Matrix& B,
                                    const Matrix& P);

/// Given n x (n+p) rows that are orthonormal, returns the p x (n+p) block
/// that turns them into an orthogonal matrix.
///
/// The block is taken from a Householder QR of the transposed input. Each
/// returned row is then flipped so its first nonzero entry is positive, which
/// makes the output a deterministic function of the input.
Matrix orthogonal_complete(const Matrix& top_rows);

double spectral_radius(const Matrix& A);
double spectral_abscissa(const Matrix& A);

/// Numeric rank of [B, AB, ..., A^{n-1}B].
Eigen::Index reachability_rank(const Matrix& A, const Matrix& B);

/// Numeric rank by SVD with threshold max(rows, cols) * eps * sigma_max.
Eigen::Index numeric_rank(const Matrix& M);

/// e^{A h} by scaling and squaring. Throws NumericalFailure on overflow.
Matrix matrix_exponential(const Matrix& A, double h);

/// Reciprocal-condition floor below which a resolvent is treated as singular.
inline constexpr double kResolventRcondFloor = 1e-13;

/// (z I - A)^{-1} rhs. Throws SingularResolvent when the LU reciprocal
/// condition estimate of (z I - A) falls below kResolventRcondFloor.
ComplexMatrix resolvent_solve(const Matrix& A, std::complex<double> z,
                              const Matrix& rhs);

/// Eigenvalues sorted by (real, imag); used for spectrum comparisons.
Eigen::VectorXcd sorted_eigenvalues(const Matrix& A);

}  // namespace retrovert
