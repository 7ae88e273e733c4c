#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "retrovert/matops.hpp"

namespace retrovert {

enum class TimeDomain { kDiscrete, kContinuous };

std::string_view to_string(TimeDomain domain);

/// x(t+1) = A x(t) + B u(t),  y(t) = C x(t) + D u(t)   (discrete)
/// dx = A x dt + B du,         dy = C x dt + D du       (continuous)
struct ForwardModel {
  TimeDomain time_domain = TimeDomain::kDiscrete;
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  std::optional<std::string> name;
  std::optional<std::string> description;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
  Eigen::Index outputs() const { return C.rows(); }
};

/// Reverse-time realization of the same output.
///
/// Discrete: xbar(t-1) = Abar xbar(t) + Bbar ubar(t), y(t) = Cbar xbar(t) + Dbar ubar(t).
/// Continuous: dxbar = -Abar xbar dt + Bbar dubar, dy = Cbar xbar dt + Dbar dubar.
/// In both cases Abar = A'.
struct BackwardModel {
  static constexpr std::string_view kDirection = "reverse-time";

  TimeDomain time_domain = TimeDomain::kDiscrete;
  Matrix Abar;
  Matrix Bbar;
  Matrix Cbar;
  Matrix Dbar;
  std::string gauge;
};

struct ValidationReport {
  bool dimension_ok = false;
  bool finite = false;
  bool stable = false;
  /// 1 - spectral radius (discrete) or -spectral abscissa (continuous).
  double stability_margin = 0.0;
  bool reachable = false;
  Eigen::Index reachability_rank = 0;
  bool full_rank_b = false;
  std::vector<std::string> messages;

  bool pass() const {
    return dimension_ok && finite && stable && reachable && full_rank_b;
  }
};

ValidationReport validate(const ForwardModel& model);

/// Parses a model document. Throws ParseError (malformed JSON, with line and
/// column) or SchemaError (missing, extra or ill-typed keys).
ForwardModel parse_model(std::string_view text);

/// Parses a document produced by serialize_model(const BackwardModel&).
BackwardModel parse_backward_model(std::string_view text);

/// Canonical form: fixed key order, one key per line, matrices as compact
/// nested arrays, shortest round-trip numbers, trailing newline.
std::string serialize_model(const ForwardModel& model);
std::string serialize_model(const BackwardModel& model);

/// Shortest decimal that parses back to the same double ("1.0", "0.75").
std::string render_number(double value);
std::string render_matrix(const Matrix& M);

/// Writes the one-key-per-line object layout shared by model files and
/// command reports. Values are pre-rendered JSON fragments.
class DocumentWriter {
 public:
  DocumentWriter& field(std::string_view key, std::string_view json_fragment);
  DocumentWriter& text(std::string_view key, std::string_view value);
  DocumentWriter& number(std::string_view key, double value);
  DocumentWriter& integer(std::string_view key, long long value);
  DocumentWriter& boolean(std::string_view key, bool value);
  DocumentWriter& matrix(std::string_view key, const Matrix& M);

  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

/// JSON string literal with escaping.
std::string quote(std::string_view s);

}  // namespace retrovert
