#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "retrovert/reversal.hpp"

namespace retrovert {

/// 64-bit Mersenne Twister (std::mt19937_64, whose output sequence is fixed
/// by the C++ standard) feeding a Box-Muller transform. Uniforms use the top
/// 53 bits, offset by half an ulp so log() never sees zero.
inline constexpr std::string_view kGeneratorId = "mt19937_64+box-muller/1";

class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed, std::uint64_t stream = 0);

  double gaussian();
  Vector gaussian_vector(Eigen::Index n);
  /// Filled time-major: row 0 first, so a longer draw extends a shorter one.
  Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  double uniform_open();

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// N x p i.i.d. standard normal draws. Identical arguments give identical bits.
Matrix gen_white_noise(std::uint64_t seed, Eigen::Index N, Eigen::Index p);

struct ForwardRun {
  Matrix x;  // (N+1) x n, x.row(0) = x0
  Matrix y;  // N x m
};

/// x(t+1) = A x(t) + B u(t), y(t) = C x(t) + D u(t), t = 0..N-1.
ForwardRun run_forward_discrete(const ForwardModel& model, const Matrix& u, const Vector& x0);

/// ubar(t) = Bbar' x(t) + J u(t). Uses x rows 0..N-1, so ubar(t) depends on
/// x(0) and u(0..t) only.
Matrix derive_dual_input(const AllPassExtension& ext, const Matrix& x, const Matrix& u);

struct BackwardRun {
  Matrix xbar;   // N x n, xbar.row(N-1) = xbar_end
  Matrix y;      // N x m
  Matrix u_rec;  // N x p
};

/// Runs t = N-1 down to 0:
///   y(t) = Cbar xbar(t) + Dbar ubar(t),  u(t) = B' xbar(t) + J' ubar(t),
///   xbar(t-1) = A' xbar(t) + Bbar ubar(t).
BackwardRun run_backward_discrete(const ReversalResult& result, const Matrix& ubar,
                                  const Vector& xbar_end);

/// Aligned processes of one run. In continuous time u, ubar and y hold the
/// increments over [t_k, t_k + h) and x is sampled at t_k.
struct SamplePath {
  TimeDomain time_domain = TimeDomain::kDiscrete;
  double step = 1.0;
  Eigen::Index horizon = 0;
  Matrix u;     // N x p
  Matrix x;     // (N+1) x n
  Matrix y;     // N x m
  Matrix ubar;  // N x p
  Matrix xbar;  // N x n; discrete Pinv x(t+1), continuous Pinv x(t)
  std::uint64_t seed = 0;
  std::string generator_id;
};

/// Stationary start x(0) = S g with g standard normal, then white u.
SamplePath simulate_discrete(const ReversalResult& result, std::uint64_t seed, Eigen::Index N,
                             std::optional<Vector> x0 = std::nullopt);

/// max over t of |u - u_rec| and |y_forward - y_backward| after running the
/// backward model from xbar(N-1) = Pinv x(N).
double roundtrip_check(const ForwardModel& model, std::uint64_t seed, Eigen::Index N);
double roundtrip_check(const ReversalResult& result, std::uint64_t seed, Eigen::Index N);

/// Matrices for exact sampling of dx = A x dt + B du on a grid of step h.
struct ExactStep {
  Matrix transition;        // e^{A h}
  Matrix noise_covariance;  // Q_h = P - e^{Ah} P e^{A'h}
  Matrix input_coupling;    // K_h = int_0^h e^{A tau} B dtau = cov(w_k, du_k)
  Matrix residual_factor;   // factor of Q_h - K_h K_h' / h
};

/// Largest admissible h * |spectral abscissa|.
inline constexpr double kMaxStepScale = 0.5;

ExactStep exact_step(const Matrix& A, const Matrix& B, const Matrix& P, double h);

/// Exact-in-distribution sampling on the grid t_k = k h. The state and input
/// increments are drawn jointly, so x is driven by exactly the increments du
/// recorded in the path. The dual increments use the left-endpoint rule
/// dubar_k = du_k - h Bbar' x_k.
/// Throws StepTooLarge when h |spectral abscissa(A)| > 0.5.
SamplePath simulate_continuous(const ReversalResult& result, std::uint64_t seed, Eigen::Index N,
                               double h);

/// Exponential-Euler backward recursion xbar_k = e^{A'h} (xbar_{k+1} - Bbar dubar_k)
/// from xbar_{N-1}, and the reconstructed increments du_k = h B' xbar_k + dubar_k.
/// Accurate to O(h) only.
BackwardRun run_backward_continuous(const ReversalResult& result, const Matrix& dubar,
                                    const Vector& xbar_end, double h);

/// Biased sample autocovariance (1/N) sum seq(t+k) seq(t)', k = 0..max_lag.
/// Throws InsufficientData unless N > 10 max_lag.
std::vector<Matrix> estimate_autocovariance(const Matrix& seq, int max_lag);

/// Largest |normalized autocovariance| over lags 1..max_lag, each entry
/// divided by sqrt(C(0)_ii C(0)_jj).
double max_autocorrelation(const Matrix& seq, int max_lag);

/// Normalized cross-covariance between xbar(t) and ubar(t - k):
/// (1/N) sum_t xbar(t) ubar(t-k)' divided entrywise by the lag-0 scales.
/// Returns the largest absolute entry over k in [min_lag, max_lag].
double normalized_cross_statistic(const Matrix& xbar, const Matrix& ubar, int min_lag,
                                  int max_lag);

/// max over the past lags of the normalized xbar/ubar cross-covariance:
/// k = 0..max_lag in discrete time, k = 1..max_lag in continuous time (the
/// increment starting at t_k lies in the future of xbar(t_k)).
double backward_orthogonality_check(const SamplePath& path, int max_lag);

/// Same statistic at the nearest future lag (-1 discrete, 0 continuous),
/// where it should be large.
double future_lag_statistic(const SamplePath& path);

/// ||S_hat - target||_F / ||target||_F with S_hat the (uncentered) sample
/// second moment of the rows of seq.
double covariance_relative_error(const Matrix& seq, const Matrix& target);

/// max over lags 0..max_lag of ||(C_ubar(k) - C_u(k)) / h||_max. The driving
/// increments act as a control variate, leaving the discretization bias,
/// which is h B' P^{-1} B at lag 0.
double increment_covariance_excess(const SamplePath& path, int max_lag);

/// Theoretical output autocovariance E y(t+k) y(t)' for k = 0..max_lag of a
/// stationary discrete model with white normalized input.
std::vector<Matrix> output_covariance(const ForwardModel& model, const Matrix& P, int max_lag);

struct StatThresholds {
  double whiteness = 0.0;
  double covariance = 0.0;
  double orthogonality = 0.0;
  double roundtrip = 0.0;
  double output = 0.0;
  double increment_excess = 0.0;
};

struct StatReport {
  TimeDomain time_domain = TimeDomain::kDiscrete;
  std::uint64_t seed = 0;
  Eigen::Index steps = 0;
  int lags = 0;
  double step = 1.0;
  std::string generator_id;

  double roundtrip_error = 0.0;
  double output_mismatch = 0.0;
  double max_autocorr_deviation = 0.0;
  double reverse_autocorr_deviation = 0.0;  // discrete only
  double covariance_rel_error = 0.0;        // x against P
  double backward_covariance_rel_error = 0.0;  // xbar against P^{-1}
  double cross_orth_max = 0.0;
  double future_lag_statistic = 0.0;
  double increment_excess = 0.0;  // continuous only

  StatThresholds thresholds;

  bool roundtrip_pass = false;
  bool whiteness_pass = false;
  bool covariance_pass = false;
  bool orthogonality_pass = false;
  bool increment_pass = false;

  bool pass() const {
    return roundtrip_pass && whiteness_pass && covariance_pass && orthogonality_pass &&
           increment_pass;
  }
};

/// Discrete: roundtrip, whiteness of ubar and of the reconstructed u,
/// covariances, backward orthogonality. Continuous: the same statistics with
/// bands widened by O(h) and by the effective sample size of the path.
/// Throws InsufficientData when N <= 10 lags.
StatReport run_statistics(const ReversalResult& result, std::uint64_t seed, Eigen::Index N,
                          int lags, std::optional<double> h = std::nullopt);

/// Writes t, u..., x..., y..., ubar..., xbar... one line per step with a
/// header row.
void write_path_dump(std::ostream& out, const SamplePath& path);

}  // namespace retrovert
