#include "retrovert/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "retrovert/error.hpp"
#include "retrovert/kernels.hpp"

namespace retrovert {

// ---------------------------------------------------------------------------
// noise

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t stream)
    : engine_(seed ^ (stream * 0x9E3779B97F4A7C15ULL)) {}

double NoiseSource::uniform_open() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
}

double NoiseSource::gaussian() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Vector NoiseSource::gaussian_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian();
  return v;
}

Matrix NoiseSource::gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix M(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index j = 0; j < cols; ++j) M(t, j) = gaussian();
  }
  return M;
}

Matrix gen_white_noise(std::uint64_t seed, Eigen::Index N, Eigen::Index p) {
  if (N < 1 || p < 1) throw DimensionMismatch("gen_white_noise: need N >= 1 and p >= 1");
  return NoiseSource(seed).gaussian_matrix(N, p);
}

// ---------------------------------------------------------------------------
// discrete recursions

ForwardRun run_forward_discrete(const ForwardModel& model, const Matrix& u, const Vector& x0) {
  const Eigen::Index n = model.states();
  if (u.cols() != model.inputs() || x0.size() != n) {
    throw DimensionMismatch("run_forward_discrete: input or initial state has the wrong size");
  }
  const Eigen::Index N = u.rows();
  ForwardRun run;
  run.x.resize(N + 1, n);
  run.y.resize(N, model.outputs());
  run.x.row(0) = x0.transpose();
  const Matrix At = model.A.transpose();
  const Matrix Bt = model.B.transpose();
  const Matrix Ct = model.C.transpose();
  const Matrix Dt = model.D.transpose();
  for (Eigen::Index t = 0; t < N; ++t) {
    run.y.row(t).noalias() = run.x.row(t) * Ct + u.row(t) * Dt;
    run.x.row(t + 1).noalias() = run.x.row(t) * At + u.row(t) * Bt;
  }
  return run;
}

Matrix derive_dual_input(const AllPassExtension& ext, const Matrix& x, const Matrix& u) {
  if (u.cols() != ext.inputs() || x.cols() != ext.states() || x.rows() < u.rows()) {
    throw DimensionMismatch("derive_dual_input: paths do not match the extension");
  }
  const Eigen::Index N = u.rows();
  // ubar(t)' = x(t)' Bbar + u(t)' J'
  return x.topRows(N) * ext.Bbar + u * ext.J.transpose();
}

BackwardRun run_backward_discrete(const ReversalResult& result, const Matrix& ubar,
                                  const Vector& xbar_end) {
  const BackwardModel& bm = result.backward;
  const Eigen::Index n = bm.Abar.rows();
  const Eigen::Index p = bm.Bbar.cols();
  if (ubar.cols() != p || xbar_end.size() != n) {
    throw DimensionMismatch("run_backward_discrete: input or terminal state has the wrong size");
  }
  const Eigen::Index N = ubar.rows();
  BackwardRun run;
  run.xbar.resize(N, n);
  run.y.resize(N, bm.Cbar.rows());
  run.u_rec.resize(N, p);
  if (N == 0) return run;

  // Row-vector forms of the backward equations.
  const Matrix AbarT = bm.Abar.transpose();
  const Matrix BbarT = bm.Bbar.transpose();
  const Matrix CbarT = bm.Cbar.transpose();
  const Matrix DbarT = bm.Dbar.transpose();
  const Matrix& B = result.forward.B;  // u' = xbar' B + ubar' J
  const Matrix& J = result.extension.J;

  run.xbar.row(N - 1) = xbar_end.transpose();
  for (Eigen::Index t = N - 1; t >= 0; --t) {
    run.y.row(t).noalias() = run.xbar.row(t) * CbarT + ubar.row(t) * DbarT;
    run.u_rec.row(t).noalias() = run.xbar.row(t) * B + ubar.row(t) * J;
    if (t > 0) {
      run.xbar.row(t - 1).noalias() = run.xbar.row(t) * AbarT + ubar.row(t) * BbarT;
    }
  }
  return run;
}

SamplePath simulate_discrete(const ReversalResult& result, std::uint64_t seed, Eigen::Index N,
                             std::optional<Vector> x0) {
  if (N < 1) throw DimensionMismatch("simulate_discrete: need N >= 1");
  const ForwardModel& model = result.forward;
  const GramianFactorization& g = result.gramian();
  NoiseSource noise(seed);
  const Vector start = x0 ? *x0 : Vector(g.S * noise.gaussian_vector(model.states()));

  SamplePath path;
  path.time_domain = TimeDomain::kDiscrete;
  path.step = 1.0;
  path.horizon = N;
  path.seed = seed;
  path.generator_id = std::string(kGeneratorId);
  path.u = noise.gaussian_matrix(N, model.inputs());

  ForwardRun fwd = run_forward_discrete(model, path.u, start);
  path.ubar = derive_dual_input(result.extension, fwd.x, path.u);
  path.xbar = fwd.x.bottomRows(N) * g.Pinv;  // rows of (Pinv x(t+1))'
  path.x = std::move(fwd.x);
  path.y = std::move(fwd.y);
  return path;
}

double roundtrip_check(const ReversalResult& result, std::uint64_t seed, Eigen::Index N) {
  const SamplePath path = simulate_discrete(result, seed, N);
  const Vector xbar_end = result.gramian().Pinv * path.x.row(N).transpose();
  const BackwardRun bwd = run_backward_discrete(result, path.ubar, xbar_end);
  const double du = (path.u - bwd.u_rec).cwiseAbs().maxCoeff();
  const double dy = (path.y - bwd.y).cwiseAbs().maxCoeff();
  return std::max(du, dy);
}

double roundtrip_check(const ForwardModel& model, std::uint64_t seed, Eigen::Index N) {
  return roundtrip_check(reverse_discrete(model), seed, N);
}

// ---------------------------------------------------------------------------
// continuous time

ExactStep exact_step(const Matrix& A, const Matrix& B, const Matrix& P, double h) {
  const Eigen::Index n = A.rows();
  ExactStep s;
  s.transition = matrix_exponential(A, h);
  s.noise_covariance = P - s.transition * P * s.transition.transpose();
  s.noise_covariance = 0.5 * (s.noise_covariance + s.noise_covariance.transpose()).eval();
  // A is Hurwitz, hence invertible.
  s.input_coupling = A.partialPivLu().solve((s.transition - Matrix::Identity(n, n)) * B);

  Matrix R = s.noise_covariance - s.input_coupling * s.input_coupling.transpose() / h;
  R = 0.5 * (R + R.transpose()).eval();
  // R is a Schur complement of a covariance, so PSD up to rounding.
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(R);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure("eigen-decomposition of the step residual covariance failed");
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  s.residual_factor = eig.eigenvectors() * root.asDiagonal();
  return s;
}

SamplePath simulate_continuous(const ReversalResult& result, std::uint64_t seed, Eigen::Index N,
                               double h) {
  const ForwardModel& model = result.forward;
  if (model.time_domain != TimeDomain::kContinuous) {
    throw Error("simulate_continuous: model is not a continuous-time model");
  }
  if (N < 1) throw DimensionMismatch("simulate_continuous: need N >= 1");
  if (!(h > 0.0)) throw StepTooLarge("simulate_continuous: step must be positive");
  const double alpha = std::abs(spectral_abscissa(model.A));
  if (h * alpha > kMaxStepScale) {
    throw StepTooLarge("step " + render_number(h) + " times |spectral abscissa| " +
                       render_number(alpha) + " exceeds 0.5");
  }
  const GramianFactorization& g = result.gramian();
  const Eigen::Index n = model.states();
  const Eigen::Index p = model.inputs();
  const ExactStep step = exact_step(model.A, model.B, g.P, h);
  const double sqrt_h = std::sqrt(h);

  NoiseSource noise(seed);
  SamplePath path;
  path.time_domain = TimeDomain::kContinuous;
  path.step = h;
  path.horizon = N;
  path.seed = seed;
  path.generator_id = std::string(kGeneratorId);
  path.u.resize(N, p);
  path.x.resize(N + 1, n);
  path.x.row(0) = (g.S * noise.gaussian_vector(n)).transpose();

  const Matrix Et = step.transition.transpose();
  const Matrix Kt = (step.input_coupling / h).transpose();
  const Matrix Lt = step.residual_factor.transpose();
  for (Eigen::Index k = 0; k < N; ++k) {
    const Vector z_in = noise.gaussian_vector(p);
    const Vector z_res = noise.gaussian_vector(n);
    path.u.row(k) = sqrt_h * z_in.transpose();
    path.x.row(k + 1).noalias() =
        path.x.row(k) * Et + path.u.row(k) * Kt + z_res.transpose() * Lt;
  }

  const Matrix& Bbar = result.extension.Bbar;
  path.ubar = path.u - h * path.x.topRows(N) * Bbar;
  path.y = h * path.x.topRows(N) * model.C.transpose() + path.u * model.D.transpose();
  path.xbar = path.x.topRows(N) * g.Pinv;
  return path;
}

BackwardRun run_backward_continuous(const ReversalResult& result, const Matrix& dubar,
                                    const Vector& xbar_end, double h) {
  const BackwardModel& bm = result.backward;
  const Eigen::Index n = bm.Abar.rows();
  const Eigen::Index p = bm.Bbar.cols();
  if (dubar.cols() != p || xbar_end.size() != n) {
    throw DimensionMismatch("run_backward_continuous: input or terminal state has the wrong size");
  }
  const Eigen::Index N = dubar.rows();
  BackwardRun run;
  run.xbar.resize(N, n);
  run.y.resize(N, bm.Cbar.rows());
  run.u_rec.resize(N, p);
  if (N == 0) return run;

  // Row form of xbar_k = e^{A'h} (xbar_{k+1} - Bbar dubar_k): e^{A'h}' = e^{Ah}.
  const Matrix E = matrix_exponential(result.forward.A, h);
  const Matrix BbarT = bm.Bbar.transpose();
  const Matrix CbarT = bm.Cbar.transpose();
  const Matrix DbarT = bm.Dbar.transpose();
  const Matrix& B = result.forward.B;

  run.xbar.row(N - 1) = xbar_end.transpose();
  for (Eigen::Index k = N - 1; k >= 0; --k) {
    run.y.row(k).noalias() = h * run.xbar.row(k) * CbarT + dubar.row(k) * DbarT;
    run.u_rec.row(k).noalias() = h * run.xbar.row(k) * B + dubar.row(k);
    if (k > 0) {
      run.xbar.row(k - 1).noalias() = (run.xbar.row(k) - dubar.row(k - 1) * BbarT) * E;
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// estimators

std::vector<Matrix> estimate_autocovariance(const Matrix& seq, int max_lag) {
  if (max_lag < 0) throw InsufficientData("estimate_autocovariance: negative lag");
  if (!(seq.rows() > 10 * static_cast<Eigen::Index>(max_lag))) {
    throw InsufficientData("need more than " + std::to_string(10 * max_lag) +
                           " samples for " + std::to_string(max_lag) + " lags, got " +
                           std::to_string(seq.rows()));
  }
  return kernels::autocovariance(seq, max_lag);
}

namespace {

Vector lag0_scales(const Matrix& seq) {
  return (seq.colwise().squaredNorm().transpose() / static_cast<double>(seq.rows())).cwiseSqrt();
}

double max_normalized(const std::vector<Matrix>& blocks, const Vector& row_scale,
                      const Vector& col_scale, std::size_t skip_first) {
  const Matrix denom = row_scale * col_scale.transpose();
  double worst = 0.0;
  for (std::size_t k = skip_first; k < blocks.size(); ++k) {
    worst = std::max(worst, blocks[k].cwiseQuotient(denom).cwiseAbs().maxCoeff());
  }
  return worst;
}

void require_enough(Eigen::Index N, int max_lag) {
  if (!(N > 10 * static_cast<Eigen::Index>(std::max(max_lag, 0)))) {
    throw InsufficientData("need more than " + std::to_string(10 * max_lag) +
                           " samples for " + std::to_string(max_lag) + " lags, got " +
                           std::to_string(N));
  }
}

}  // namespace

double max_autocorrelation(const Matrix& seq, int max_lag) {
  const auto C = estimate_autocovariance(seq, max_lag);
  const Vector s = lag0_scales(seq);
  return max_normalized(C, s, s, 1);
}

double normalized_cross_statistic(const Matrix& xbar, const Matrix& ubar, int min_lag,
                                  int max_lag) {
  require_enough(xbar.rows(), std::max(std::abs(min_lag), std::abs(max_lag)));
  const auto C = kernels::cross_covariance(xbar, ubar, min_lag, max_lag);
  return max_normalized(C, lag0_scales(xbar), lag0_scales(ubar), 0);
}

double backward_orthogonality_check(const SamplePath& path, int max_lag) {
  const int first = path.time_domain == TimeDomain::kDiscrete ? 0 : 1;
  return normalized_cross_statistic(path.xbar, path.ubar, first, std::max(first, max_lag));
}

double future_lag_statistic(const SamplePath& path) {
  const int lag = path.time_domain == TimeDomain::kDiscrete ? -1 : 0;
  return normalized_cross_statistic(path.xbar, path.ubar, lag, lag);
}

double covariance_relative_error(const Matrix& seq, const Matrix& target) {
  const Matrix S = seq.transpose() * seq / static_cast<double>(seq.rows());
  return (S - target).norm() / target.norm();
}

double increment_covariance_excess(const SamplePath& path, int max_lag) {
  const auto Cb = estimate_autocovariance(path.ubar, max_lag);
  const auto Cu = estimate_autocovariance(path.u, max_lag);
  double worst = 0.0;
  for (std::size_t k = 0; k < Cb.size(); ++k) {
    worst = std::max(worst, ((Cb[k] - Cu[k]) / path.step).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<Matrix> output_covariance(const ForwardModel& model, const Matrix& P, int max_lag) {
  std::vector<Matrix> out;
  out.push_back(model.C * P * model.C.transpose() + model.D * model.D.transpose());
  // E y(t+k) y(t)' = C A^{k-1} (A P C' + B D') for k >= 1
  Matrix G = model.A * P * model.C.transpose() + model.B * model.D.transpose();
  for (int k = 1; k <= max_lag; ++k) {
    out.push_back(model.C * G);
    G = model.A * G;
  }
  return out;
}

// ---------------------------------------------------------------------------
// statistics bundle

namespace {

// Tolerances of the statistical checks.
constexpr double kWhitenessBand = 4.0;       // x 1/sqrt(N)
constexpr double kOrthogonalityBand = 5.0;   // x 1/sqrt(N)
constexpr double kCovarianceTolerance = 0.05;
constexpr double kDiscreteRoundtripTolerance = 1e-9;
constexpr double kDiscreteOutputTolerance = 1e-10;
// Continuous reconstruction error in units of sqrt(h), per unit of h times
// the rate scale ||A|| + ||B' P^{-1} B|| (and the output gain for y).
constexpr double kContinuousRoundtripSlope = 4.0;

double spectral_norm(const Matrix& M) {
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

StatReport discrete_statistics(const ReversalResult& result, std::uint64_t seed,
                               Eigen::Index N, int lags) {
  StatReport r;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
  r.thresholds.whiteness = kWhitenessBand * inv_sqrt_n;
  r.thresholds.orthogonality = kOrthogonalityBand * inv_sqrt_n;
  r.thresholds.covariance = kCovarianceTolerance;
  r.thresholds.roundtrip = kDiscreteRoundtripTolerance;
  r.thresholds.output = kDiscreteOutputTolerance;
  r.thresholds.increment_excess = 0.0;

  const SamplePath path = simulate_discrete(result, seed, N);
  const GramianFactorization& g = result.gramian();
  const Vector xbar_end = g.Pinv * path.x.row(N).transpose();
  const BackwardRun bwd = run_backward_discrete(result, path.ubar, xbar_end);
  r.roundtrip_error = (path.u - bwd.u_rec).cwiseAbs().maxCoeff();
  r.output_mismatch = (path.y - bwd.y).cwiseAbs().maxCoeff();

  r.max_autocorr_deviation = max_autocorrelation(path.ubar, lags);

  // Reverse direction: white ubar and a stationary terminal state give a white u.
  NoiseSource reverse_noise(seed, 1);
  const Vector end = g.S.transpose().triangularView<Eigen::Upper>().solve(
      reverse_noise.gaussian_vector(result.forward.states()));
  const Matrix white_ubar = reverse_noise.gaussian_matrix(N, result.forward.inputs());
  const BackwardRun rev = run_backward_discrete(result, white_ubar, end);
  r.reverse_autocorr_deviation = max_autocorrelation(rev.u_rec, lags);

  r.covariance_rel_error = covariance_relative_error(path.x.topRows(N), g.P);
  r.backward_covariance_rel_error = covariance_relative_error(path.xbar, g.Pinv);
  r.cross_orth_max = backward_orthogonality_check(path, lags);
  r.future_lag_statistic = future_lag_statistic(path);

  r.roundtrip_pass = r.roundtrip_error <= r.thresholds.roundtrip &&
                     r.output_mismatch <= r.thresholds.output;
  r.whiteness_pass = r.max_autocorr_deviation <= r.thresholds.whiteness &&
                     r.reverse_autocorr_deviation <= r.thresholds.whiteness;
  r.covariance_pass = r.covariance_rel_error <= r.thresholds.covariance &&
                      r.backward_covariance_rel_error <= r.thresholds.covariance;
  r.orthogonality_pass = r.cross_orth_max <= r.thresholds.orthogonality;
  r.increment_pass = true;
  return r;
}

StatReport continuous_statistics(const ReversalResult& result, std::uint64_t seed,
                                 Eigen::Index N, int lags, double h) {
  StatReport r;
  const ForwardModel& model = result.forward;
  const GramianFactorization& g = result.gramian();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
  const double alpha = std::abs(spectral_abscissa(model.A));
  // O(h) constant: the lag-0 bias of the dual increments is h B' P^{-1} B.
  const double bias = (model.B.transpose() * g.Pinv * model.B).cwiseAbs().maxCoeff();
  // Relative standard deviation of a sample variance of an OU-type path
  // observed over T = N h: sqrt(2 / (|alpha| T)).
  const double cov_sd = std::sqrt(2.0 / (alpha * static_cast<double>(N) * h));

  r.thresholds.whiteness = kWhitenessBand * inv_sqrt_n + h * bias;
  r.thresholds.orthogonality = kOrthogonalityBand * inv_sqrt_n + h * bias;
  r.thresholds.covariance = kCovarianceTolerance + 4.0 * cov_sd;
  const double rate = spectral_norm(model.A) + spectral_norm(model.B.transpose() * g.Pinv * model.B);
  const double gain = spectral_norm(model.C) * spectral_norm(g.S) + spectral_norm(model.D);
  r.thresholds.roundtrip = kContinuousRoundtripSlope * h * rate;
  r.thresholds.output = r.thresholds.roundtrip * gain;
  r.thresholds.increment_excess = 2.0 * h * bias + kWhitenessBand * inv_sqrt_n;

  const SamplePath path = simulate_continuous(result, seed, N, h);
  const Vector xbar_end = path.xbar.row(N - 1).transpose();
  const BackwardRun bwd = run_backward_continuous(result, path.ubar, xbar_end, h);
  const double sqrt_h = std::sqrt(h);
  r.roundtrip_error = (path.u - bwd.u_rec).cwiseAbs().maxCoeff() / sqrt_h;
  r.output_mismatch = (path.y - bwd.y).cwiseAbs().maxCoeff() / sqrt_h;

  r.max_autocorr_deviation = max_autocorrelation(path.ubar, lags);
  r.reverse_autocorr_deviation = 0.0;
  r.covariance_rel_error = covariance_relative_error(path.x.topRows(N), g.P);
  r.backward_covariance_rel_error = covariance_relative_error(path.xbar, g.Pinv);
  r.cross_orth_max = backward_orthogonality_check(path, lags);
  r.future_lag_statistic = future_lag_statistic(path);
  r.increment_excess = increment_covariance_excess(path, lags);

  r.roundtrip_pass = r.roundtrip_error <= r.thresholds.roundtrip &&
                     r.output_mismatch <= r.thresholds.output;
  r.whiteness_pass = r.max_autocorr_deviation <= r.thresholds.whiteness;
  r.covariance_pass = r.covariance_rel_error <= r.thresholds.covariance &&
                      r.backward_covariance_rel_error <= r.thresholds.covariance;
  r.orthogonality_pass = r.cross_orth_max <= r.thresholds.orthogonality;
  r.increment_pass = r.increment_excess <= r.thresholds.increment_excess;
  return r;
}

}  // namespace

StatReport run_statistics(const ReversalResult& result, std::uint64_t seed, Eigen::Index N,
                          int lags, std::optional<double> h) {
  require_enough(N, lags);
  StatReport r;
  if (result.forward.time_domain == TimeDomain::kDiscrete) {
    r = discrete_statistics(result, seed, N, lags);
  } else {
    if (!h) throw StepTooLarge("continuous simulation needs an explicit step");
    r = continuous_statistics(result, seed, N, lags, *h);
  }
  r.time_domain = result.forward.time_domain;
  r.seed = seed;
  r.steps = N;
  r.lags = lags;
  r.step = h.value_or(1.0);
  r.generator_id = std::string(kGeneratorId);
  return r;
}

// ---------------------------------------------------------------------------
// path dump

void write_path_dump(std::ostream& out, const SamplePath& path) {
  auto header = [&](const char* name, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) out << ' ' << name << i;
  };
  out << 't';
  header("u", path.u.cols());
  header("x", path.x.cols());
  header("y", path.y.cols());
  header("ubar", path.ubar.cols());
  header("xbar", path.xbar.cols());
  out << '\n';

  auto row = [&](const Matrix& M, Eigen::Index t) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << ' ' << render_number(M(t, j));
  };
  for (Eigen::Index t = 0; t < path.horizon; ++t) {
    if (path.time_domain == TimeDomain::kDiscrete) {
      out << t;
    } else {
      out << render_number(static_cast<double>(t) * path.step);
    }
    row(path.u, t);
    row(path.x, t);
    row(path.y, t);
    row(path.ubar, t);
    row(path.xbar, t);
    out << '\n';
  }
}

}  // namespace retrovert
