#include "retrovert/matops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "retrovert/error.hpp"

namespace retrovert {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const Matrix& A, const char* who) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw DimensionMismatch(std::string(who) + ": A must be square and nonempty");
  }
}

void require_pair(const Matrix& A, const Matrix& B, const char* who) {
  require_square(A, who);
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw DimensionMismatch(std::string(who) + ": B must have n rows and at least one column");
  }
  if (A.rows() > kMaxStateDimension) {
    throw DimensionMismatch(std::string(who) + ": state dimension " +
                            std::to_string(A.rows()) + " exceeds " +
                            std::to_string(kMaxStateDimension));
  }
}

// vec() is column-major throughout, so vec(X Y Z) = (Z' kron X) vec(Y).
Matrix kron(const Matrix& X, const Matrix& Y) {
  Matrix K(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      K.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
    }
  }
  return K;
}

Matrix unvec(const Vector& v, Eigen::Index n) {
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

// One step of iterative refinement keeps the relative residual near eps on
// the mildly ill-conditioned Kronecker systems that show up at n ~ 10.
Vector solve_refined(const Matrix& M, const Vector& rhs) {
  const Eigen::PartialPivLU<Matrix> lu(M);
  Vector x = lu.solve(rhs);
  const Vector r = rhs - M * x;
  x += lu.solve(r);
  if (!x.allFinite()) {
    throw NumericalFailure("Kronecker Lyapunov solve produced non-finite values");
  }
  return x;
}

GramianFactorization factor_gramian(Matrix P) {
  const Eigen::Index n = P.rows();
  P = 0.5 * (P + P.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(P, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure("eigen-decomposition of the Gramian failed");
  }
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double floor = 100.0 * static_cast<double>(n) * kEps * std::max(lmax, 0.0);
  if (!(lmax > 0.0) || !(lmin > floor)) {
    throw SingularGramian("Gramian is not positive definite (min eigenvalue " +
                          std::to_string(lmin) + "); is the pair reachable?");
  }

  const Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) {
    throw SingularGramian("Cholesky factorization of the Gramian failed");
  }
  GramianFactorization g;
  g.S = llt.matrixL();
  g.Pinv = llt.solve(Matrix::Identity(n, n));
  g.Pinv = 0.5 * (g.Pinv + g.Pinv.transpose()).eval();
  g.P = std::move(P);
  return g;
}

}  // namespace

GramianFactorization solve_discrete_lyapunov(const Matrix& A, const Matrix& B) {
  require_pair(A, B, "solve_discrete_lyapunov");
  const double rho = spectral_radius(A);
  if (rho >= 1.0 - kStabilityMargin) {
    throw UnstableMatrix("spectral radius " + std::to_string(rho) +
                         " is not below 1 - 1e-8");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index n2 = n * n;
  const Matrix M = Matrix::Identity(n2, n2) - kron(A, A);
  const Matrix Q = B * B.transpose();
  const Vector rhs = Eigen::Map<const Vector>(Q.data(), n2);
  return factor_gramian(unvec(solve_refined(M, rhs), n));
}

GramianFactorization solve_continuous_lyapunov(const Matrix& A,
                                               const Matrix& B) {
  require_pair(A, B, "solve_continuous_lyapunov");
  const double alpha = spectral_abscissa(A);
  if (alpha >= -kStabilityMargin) {
    throw UnstableMatrix("spectral abscissa " + std::to_string(alpha) +
                         " is not below -1e-8");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index n2 = n * n;
  const Matrix I = Matrix::Identity(n, n);
  const Matrix M = kron(I, A) + kron(A, I);
  const Matrix Q = -(B * B.transpose());
  const Vector rhs = Eigen::Map<const Vector>(Q.data(), n2);
  return factor_gramian(unvec(solve_refined(M, rhs), n));
}

double discrete_lyapunov_residual(const Matrix& A, const Matrix& B,
                                  const Matrix& P) {
  const Matrix R = P - A * P * A.transpose() - B * B.transpose();
  return R.norm() / (1.0 + P.norm());
}

double continuous_lyapunov_residual(const Matrix& A, const Matrix& B,
                                    const Matrix& P) {
  const Matrix R = A * P + P * A.transpose() + B * B.transpose();
  return R.norm() / (1.0 + P.norm());
}

Matrix orthogonal_complete(const Matrix& top_rows) {
  const Eigen::Index n = top_rows.rows();
  const Eigen::Index total = top_rows.cols();
  if (n == 0 || total < n) {
    throw DimensionMismatch("orthogonal_complete: expected n x (n+p) input with p >= 0");
  }
  const double defect =
      (top_rows * top_rows.transpose() - Matrix::Identity(n, n)).norm();
  if (!(defect <= kCoisometryTolerance)) {
    throw NotCoisometric("input rows are not orthonormal (defect " +
                         std::to_string(defect) + ")");
  }
  const Eigen::Index p = total - n;

  const Eigen::HouseholderQR<Matrix> qr(top_rows.transpose());
  const Matrix Q = qr.householderQ() * Matrix::Identity(total, total);
  Matrix completion = Q.rightCols(p).transpose();

  constexpr double kZero = 1e-10;
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < total; ++c) {
      const double v = completion(r, c);
      if (std::abs(v) > kZero) {
        if (v < 0.0) completion.row(r) *= -1.0;
        break;
      }
    }
  }
  return completion;
}

double spectral_radius(const Matrix& A) {
  require_square(A, "spectral_radius");
  const Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("eigenvalue iteration failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_abscissa(const Matrix& A) {
  require_square(A, "spectral_abscissa");
  const Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("eigenvalue iteration failed");
  }
  return es.eigenvalues().real().maxCoeff();
}

Eigen::Index numeric_rank(const Matrix& M) {
  if (M.size() == 0) return 0;
  const Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (!(smax > 0.0)) return 0;
  const double tol =
      static_cast<double>(std::max(M.rows(), M.cols())) * kEps * smax;
  return (sv.array() > tol).count();
}

Eigen::Index reachability_rank(const Matrix& A, const Matrix& B) {
  require_square(A, "reachability_rank");
  if (B.rows() != A.rows()) {
    throw DimensionMismatch("reachability_rank: B must have n rows");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  Matrix K(n, n * p);
  Matrix block = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    K.middleCols(k * p, p) = block;
    block = A * block;
  }
  return numeric_rank(K);
}

Matrix matrix_exponential(const Matrix& A, double h) {
  require_square(A, "matrix_exponential");
  if (!(h > 0.0)) {
    throw Error("matrix_exponential: step must be positive");
  }
  const Matrix Ah = A * h;
  Matrix E = Ah.exp();
  if (!E.allFinite()) {
    throw NumericalFailure("matrix exponential overflowed");
  }
  return E;
}

ComplexMatrix resolvent_solve(const Matrix& A, std::complex<double> z,
                              const Matrix& rhs) {
  require_square(A, "resolvent_solve");
  if (rhs.rows() != A.rows()) {
    throw DimensionMismatch("resolvent_solve: right-hand side must have n rows");
  }
  const Eigen::Index n = A.rows();
  ComplexMatrix M = -A.cast<std::complex<double>>();
  M.diagonal().array() += z;
  const Eigen::PartialPivLU<ComplexMatrix> lu(M);
  const double rcond = lu.rcond();
  if (!(rcond >= kResolventRcondFloor)) {
    throw SingularResolvent("resolvent is numerically singular (rcond " +
                            std::to_string(rcond) + ")");
  }
  (void)n;
  return lu.solve(rhs.cast<std::complex<double>>());
}

Eigen::VectorXcd sorted_eigenvalues(const Matrix& A) {
  require_square(A, "sorted_eigenvalues");
  const Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("eigenvalue iteration failed");
  }
  Eigen::VectorXcd ev = es.eigenvalues();
  std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace retrovert
