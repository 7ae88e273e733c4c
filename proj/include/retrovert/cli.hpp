#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "retrovert/model.hpp"

namespace retrovert::cli {

/// The only exit codes the tool uses.
enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 2,
  kVerificationFailure = 3,
  kIoFailure = 4,
};

struct VerifyOptions {
  std::optional<std::size_t> grid;  // default depends on the time domain
  double tolerance = 1e-8;
};

struct SimulateOptions {
  std::uint64_t seed = 1;
  long long steps = 100000;
  std::optional<double> dt;
  int lags = 20;
  std::optional<std::string> emit_paths;
};

struct VerifyReport {
  TimeDomain time_domain = TimeDomain::kDiscrete;
  std::size_t grid = 0;
  double tolerance = 0.0;

  double lyapunov_residual = 0.0;
  double completion_orthogonality = 0.0;
  double backward_gramian_residual = 0.0;
  double spectrum_deviation = 0.0;
  double allpass_deviation = 0.0;
  std::optional<double> allpass_deviation_plus_sign;  // continuous only
  double factorization_deviation = 0.0;
  double factorization_deviation_uncorrected_dbar = 0.0;
  std::size_t skipped_grid_points = 0;

  bool pass = false;
};

/// Fixed tolerances of the structural checks; the grid checks use the
/// configurable VerifyOptions::tolerance.
inline constexpr double kLyapunovTolerance = 1e-10;
inline constexpr double kDiscreteEmbeddingTolerance = 1e-12;
inline constexpr double kContinuousEmbeddingTolerance = 1e-10;
inline constexpr double kBackwardGramianTolerance = 1e-9;
inline constexpr double kSpectrumTolerance = 1e-10;

VerifyReport build_verify_report(const ForwardModel& model, const VerifyOptions& options);
std::string render_verify_report(const VerifyReport& report);

int cmd_validate(const std::string& model_file, std::ostream& out, std::ostream& err);
int cmd_reverse(const std::string& model_file, const std::optional<std::string>& out_file,
                std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& model_file, const VerifyOptions& options, std::ostream& out,
               std::ostream& err);
int cmd_simulate(const std::string& model_file, const SimulateOptions& options,
                 std::ostream& out, std::ostream& err);

}  // namespace retrovert::cli
