#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "retrovert/error.hpp"
#include "retrovert/matops.hpp"
#include "support/random_models.hpp"

using namespace retrovert;
using retrovert::testkit::gaussian;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// P = sum_k A^k B B' A'^k, summed until the terms vanish.
Matrix discrete_gramian_series(const Matrix& A, const Matrix& B) {
  Matrix P = Matrix::Zero(A.rows(), A.rows());
  Matrix term = B;
  for (int k = 0; k < 20000 && term.norm() > 1e-300; ++k) {
    P += term * term.transpose();
    term = A * term;
  }
  return P;
}

// Diagonalizes A = V L V^{-1} and solves entrywise in the eigenbasis.
Matrix continuous_gramian_eigen(const Matrix& A, const Matrix& B) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.cast<std::complex<double>>());
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd Vi = V.inverse();
  const Eigen::MatrixXcd Q = Vi * B.cast<std::complex<double>>() *
                             B.transpose().cast<std::complex<double>>() * Vi.adjoint();
  Eigen::MatrixXcd X(A.rows(), A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.rows(); ++j)
      X(i, j) = -Q(i, j) / (es.eigenvalues()(i) + std::conj(es.eigenvalues()(j)));
  return (V * X * V.adjoint()).real();
}

Matrix taylor_exp(const Matrix& A, double h) {
  Matrix sum = Matrix::Identity(A.rows(), A.cols());
  Matrix term = sum;
  for (int k = 1; k < 80; ++k) {
    term = term * A * (h / k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(DiscreteLyapunov, ZeroDynamicsGivesBBt) {
  const auto g = solve_discrete_lyapunov(scalar(0.0), scalar(1.0));
  EXPECT_NEAR(g.P(0, 0), 1.0, 1e-15);
}

TEST(DiscreteLyapunov, ScalarClosedForm) {
  const auto g = solve_discrete_lyapunov(scalar(0.5), scalar(1.0));
  EXPECT_NEAR(g.P(0, 0), 1.0 / (1.0 - 0.25), 1e-14);
  EXPECT_NEAR(g.S(0, 0), std::sqrt(4.0 / 3.0), 1e-14);
  EXPECT_NEAR(g.Pinv(0, 0), 0.75, 1e-14);
}

TEST(DiscreteLyapunov, DecoupledDiagonal) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 0.5;
  A(1, 1) = -0.3;
  const auto g = solve_discrete_lyapunov(A, Matrix::Identity(2, 2));
  EXPECT_NEAR(g.P(0, 0), 1.0 / (1.0 - 0.25), 1e-14);
  EXPECT_NEAR(g.P(1, 1), 1.0 / (1.0 - 0.09), 1e-14);
  EXPECT_NEAR(g.P(0, 1), 0.0, 1e-15);
}

TEST(DiscreteLyapunov, MatchesSeriesOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ForwardModel m = testkit::random_model(seed, TimeDomain::kDiscrete);
    const auto g = solve_discrete_lyapunov(m.A, m.B);
    const Matrix oracle = discrete_gramian_series(m.A, m.B);
    EXPECT_LE((g.P - oracle).norm() / oracle.norm(), 1e-10) << "seed " << seed;
  }
}

TEST(DiscreteLyapunov, RejectsUnstable) {
  EXPECT_THROW(solve_discrete_lyapunov(scalar(1.0), scalar(1.0)), UnstableMatrix);
  EXPECT_THROW(solve_discrete_lyapunov(scalar(1.0 - 1e-9), scalar(1.0)), UnstableMatrix);
}

TEST(DiscreteLyapunov, RejectsUnreachable) {
  const Matrix A = 0.5 * Matrix::Identity(2, 2);
  Matrix B(2, 1);
  B << 1.0, 0.0;
  EXPECT_THROW(solve_discrete_lyapunov(A, B), SingularGramian);
}

TEST(DiscreteLyapunov, RejectsBadDimensions) {
  EXPECT_THROW(solve_discrete_lyapunov(Matrix::Zero(2, 3), Matrix::Ones(2, 1)),
               DimensionMismatch);
  EXPECT_THROW(solve_discrete_lyapunov(Matrix::Zero(2, 2), Matrix::Ones(3, 1)),
               DimensionMismatch);
  EXPECT_THROW(solve_discrete_lyapunov(Matrix::Zero(65, 65), Matrix::Ones(65, 1)),
               DimensionMismatch);
}

TEST(ContinuousLyapunov, ScalarClosedForms) {
  EXPECT_NEAR(solve_continuous_lyapunov(scalar(-1.0), scalar(std::sqrt(2.0))).P(0, 0), 1.0,
              1e-14);
  EXPECT_NEAR(solve_continuous_lyapunov(scalar(-2.0), scalar(2.0)).P(0, 0), 1.0, 1e-14);
}

TEST(ContinuousLyapunov, DecoupledDiagonal) {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = -1.0;
  A(1, 1) = -3.0;
  const auto g = solve_continuous_lyapunov(A, Matrix::Identity(2, 2));
  EXPECT_NEAR(g.P(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(g.P(1, 1), 1.0 / 6.0, 1e-14);
}

TEST(ContinuousLyapunov, MatchesEigenbasisOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ForwardModel m = testkit::random_model(seed, TimeDomain::kContinuous);
    const auto g = solve_continuous_lyapunov(m.A, m.B);
    const Matrix oracle = continuous_gramian_eigen(m.A, m.B);
    EXPECT_LE((g.P - oracle).norm() / oracle.norm(), 1e-9) << "seed " << seed;
  }
}

TEST(ContinuousLyapunov, RejectsUnstable) {
  EXPECT_THROW(solve_continuous_lyapunov(scalar(0.0), scalar(1.0)), UnstableMatrix);
  EXPECT_THROW(solve_continuous_lyapunov(scalar(-1e-9), scalar(1.0)), UnstableMatrix);
}

TEST(LyapunovProperty, ResidualSymmetryAndFactor) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const ForwardModel m = testkit::ensemble_model(seed);
    const bool discrete = m.time_domain == TimeDomain::kDiscrete;
    const auto g = discrete ? solve_discrete_lyapunov(m.A, m.B)
                            : solve_continuous_lyapunov(m.A, m.B);
    const double residual = discrete ? discrete_lyapunov_residual(m.A, m.B, g.P)
                                     : continuous_lyapunov_residual(m.A, m.B, g.P);
    EXPECT_LE(residual, 1e-10) << "seed " << seed;
    EXPECT_EQ(g.P, g.P.transpose());
    EXPECT_LE((g.S * g.S.transpose() - g.P).norm(), 1e-12 * (1.0 + g.P.norm()));
    EXPECT_TRUE(g.S.isLowerTriangular());
    EXPECT_TRUE((g.S.diagonal().array() > 0.0).all());
    EXPECT_LE((g.P * g.Pinv - Matrix::Identity(m.states(), m.states())).norm(), 1e-9);
  }
}

TEST(OrthogonalComplete, RotationRow) {
  Matrix top(1, 2);
  top << 0.5, std::sqrt(3.0) / 2.0;
  const Matrix c = orthogonal_complete(top);
  ASSERT_EQ(c.rows(), 1);
  EXPECT_NEAR(c(0, 0), std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_NEAR(c(0, 1), -0.5, 1e-15);
}

TEST(OrthogonalComplete, PermutationRow) {
  Matrix top(1, 2);
  top << 0.0, 1.0;
  const Matrix c = orthogonal_complete(top);
  EXPECT_NEAR(c(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(c(0, 1), 0.0, 1e-15);
}

TEST(OrthogonalComplete, RandomCoisometry) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix Q = testkit::random_orthogonal(rng, 5);
    const Matrix top = Q.topRows(3);
    const Matrix c = orthogonal_complete(top);
    Matrix U(5, 5);
    U << top, c;
    EXPECT_LE((U.transpose() * U - Matrix::Identity(5, 5)).norm(), 1e-12);
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      Eigen::Index k = 0;
      while (std::abs(c(r, k)) <= 1e-10) ++k;
      EXPECT_GT(c(r, k), 0.0);
    }
  }
}

TEST(OrthogonalComplete, SquareInputNeedsNothing) {
  const Matrix c = orthogonal_complete(Matrix::Identity(3, 3));
  EXPECT_EQ(c.rows(), 0);
}

TEST(OrthogonalComplete, RejectsNonOrthonormalRows) {
  Matrix top(1, 2);
  top << 1.0, 1.0;
  EXPECT_THROW(orthogonal_complete(top), NotCoisometric);
  EXPECT_THROW(orthogonal_complete(Matrix::Identity(3, 2)), DimensionMismatch);
}

TEST(Spectrum, RadiusAndAbscissa) {
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 0.5;
  D(1, 1) = -0.3;
  EXPECT_NEAR(spectral_radius(D), 0.5, 1e-15);
  Matrix N(2, 2);
  N << 0.0, 1.0, 0.0, 0.0;
  EXPECT_NEAR(spectral_radius(N), 0.0, 1e-15);
  Matrix T(2, 2);
  T << -1.0, 10.0, 0.0, -2.0;
  EXPECT_NEAR(spectral_abscissa(T), -1.0, 1e-14);
  EXPECT_THROW(spectral_radius(Matrix::Zero(2, 3)), DimensionMismatch);
}

TEST(Reachability, Examples) {
  EXPECT_EQ(reachability_rank(scalar(0.5), scalar(1.0)), 1);
  Matrix B(2, 1);
  B << 1.0, 0.0;
  EXPECT_EQ(reachability_rank(0.5 * Matrix::Identity(2, 2), B), 1);
  Matrix A(2, 2);
  A << 0.0, 1.0, -0.1, 0.2;
  Matrix b(2, 1);
  b << 0.0, 1.0;
  EXPECT_EQ(reachability_rank(A, b), 2);
}

TEST(MatrixExponential, Examples) {
  EXPECT_NEAR(matrix_exponential(scalar(0.0), 3.7)(0, 0), 1.0, 0.0);
  EXPECT_NEAR(matrix_exponential(scalar(-1.0), 1.0)(0, 0), std::exp(-1.0), 1e-15);
  Matrix N(2, 2);
  N << 0.0, 1.0, 0.0, 0.0;
  const Matrix E = matrix_exponential(N, 2.0);
  EXPECT_NEAR(E(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(E(0, 1), 2.0, 1e-15);
  EXPECT_NEAR(E(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(E(1, 1), 1.0, 1e-15);
}

TEST(MatrixExponential, MatchesTaylorOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = gaussian(rng, 4, 4);
    const Matrix E = matrix_exponential(A, 0.3);
    const Matrix T = taylor_exp(A, 0.3);
    EXPECT_LE((E - T).norm() / T.norm(), 1e-12);
  }
}

TEST(MatrixExponential, Errors) {
  EXPECT_THROW(matrix_exponential(scalar(1.0), 0.0), Error);
  EXPECT_THROW(matrix_exponential(scalar(1.0), -1.0), Error);
  EXPECT_THROW(matrix_exponential(scalar(1e6), 1e3), NumericalFailure);
}

TEST(Resolvent, SolvesAndDetectsPoles) {
  const ComplexMatrix x = resolvent_solve(scalar(0.5), {2.0, 0.0}, scalar(1.0));
  EXPECT_NEAR(std::abs(x(0, 0) - std::complex<double>(1.0 / 1.5)), 0.0, 1e-15);
  EXPECT_THROW(resolvent_solve(scalar(0.5), {0.5, 0.0}, scalar(1.0)), SingularResolvent);
}
