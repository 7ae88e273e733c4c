#include "retrovert/cli.hpp"

#include <fstream>
#include <sstream>

#include "retrovert/allpass.hpp"
#include "retrovert/error.hpp"
#include "retrovert/reversal.hpp"
#include "retrovert/simulate.hpp"

namespace retrovert::cli {

namespace {

constexpr const char* kToolVersion = RETROVERT_VERSION;

struct LoadFailure {
  int code;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::ios_base::failure("cannot read " + path);
  return ss.str();
}

std::string render_messages(const std::vector<std::string>& messages) {
  std::string out = "[";
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += ", ";
    out += quote(messages[i]);
  }
  return out + "]";
}

std::string render_validation(const ValidationReport& r, TimeDomain domain) {
  DocumentWriter w;
  w.text("command", "validate")
      .text("toolVersion", kToolVersion)
      .text("timeDomain", to_string(domain))
      .boolean("pass", r.pass())
      .boolean("dimensionOk", r.dimension_ok)
      .boolean("finite", r.finite)
      .boolean("stable", r.stable)
      .number("stabilityMargin", r.stability_margin)
      .boolean("reachable", r.reachable)
      .integer("reachabilityRank", r.reachability_rank)
      .boolean("fullRankB", r.full_rank_b)
      .field("messages", render_messages(r.messages));
  return w.str();
}

// Reads, parses and validates. On failure prints to err and throws
// LoadFailure with the exit code.
ForwardModel load_valid_model(const std::string& path, std::ostream& err,
                              ValidationReport* report = nullptr) {
  ForwardModel model;
  try {
    model = parse_model(read_file(path));
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    throw LoadFailure{kIoFailure};
  } catch (const ParseError& e) {
    err << "error: " << path << ": " << e.what() << '\n';
    throw LoadFailure{kIoFailure};
  } catch (const SchemaError& e) {
    err << "error: " << path << ": " << e.what() << '\n';
    throw LoadFailure{kIoFailure};
  }
  ValidationReport r = validate(model);
  if (report) *report = r;
  if (!r.pass()) {
    err << "model validation failed:\n";
    for (const auto& m : r.messages) err << "  " << m << '\n';
  }
  return model;
}

}  // namespace

// ---------------------------------------------------------------------------
// verify

VerifyReport build_verify_report(const ForwardModel& model, const VerifyOptions& options) {
  VerifyReport r;
  r.time_domain = model.time_domain;
  r.tolerance = options.tolerance;
  r.grid = options.grid.value_or(model.time_domain == TimeDomain::kDiscrete
                                     ? kDefaultDiscreteGrid
                                     : kDefaultContinuousGrid);

  const ReversalResult result = reverse(model);
  const AllPassExtension& ext = result.extension;
  const Matrix& P = ext.gramian.P;

  r.lyapunov_residual = model.time_domain == TimeDomain::kDiscrete
                            ? discrete_lyapunov_residual(model.A, model.B, P)
                            : continuous_lyapunov_residual(model.A, model.B, P);
  r.completion_orthogonality = embedding_defect(ext);
  r.backward_gramian_residual =
      backward_gramian_residual(ext) / (1.0 + ext.gramian.Pinv.norm());
  r.spectrum_deviation =
      (sorted_eigenvalues(model.A) - sorted_eigenvalues(result.backward.Abar)).cwiseAbs().maxCoeff();

  r.allpass_deviation = check_allpass_grid(ext, r.grid);
  if (model.time_domain == TimeDomain::kContinuous) {
    r.allpass_deviation_plus_sign = check_allpass_grid(ext, r.grid, OutputSign::kPlus);
  }

  const FactorizationCheck fc = check_factorization_grid(model, result, r.grid);
  r.factorization_deviation = fc.max_deviation;
  r.skipped_grid_points = fc.skipped;

  ReversalResult uncorrected = result;
  uncorrected.backward.Dbar = uncorrected_dbar(result);
  r.factorization_deviation_uncorrected_dbar =
      check_factorization_grid(model, uncorrected, r.grid).max_deviation;

  const double embedding_tol = model.time_domain == TimeDomain::kDiscrete
                                   ? kDiscreteEmbeddingTolerance
                                   : kContinuousEmbeddingTolerance;
  r.pass = r.lyapunov_residual <= kLyapunovTolerance &&
           r.completion_orthogonality <= embedding_tol &&
           r.backward_gramian_residual <= kBackwardGramianTolerance &&
           r.spectrum_deviation <= kSpectrumTolerance &&
           r.allpass_deviation <= r.tolerance && r.factorization_deviation <= r.tolerance &&
           fc.evaluated > 0;
  return r;
}

std::string render_verify_report(const VerifyReport& r) {
  const bool discrete = r.time_domain == TimeDomain::kDiscrete;
  DocumentWriter tolerances;
  tolerances.number("lyapunovResidual", kLyapunovTolerance)
      .number("completionOrthogonality",
              discrete ? kDiscreteEmbeddingTolerance : kContinuousEmbeddingTolerance)
      .number("backwardGramianResidual", kBackwardGramianTolerance)
      .number("spectrumDeviation", kSpectrumTolerance)
      .number("allpassDeviation", r.tolerance)
      .number("factorizationDeviation", r.tolerance);

  DocumentWriter conventions;
  conventions.text("gauge", discrete ? kDiscreteGauge : kContinuousGauge)
      .text("dbar", discrete ? "C P Bbar + D J'" : "D")
      .text("structuralFunction", discrete ? "Bbar' (zI - A)^-1 B + J"
                                           : "J (I - Bbar' (sI - A)^-1 B)")
      .text("grid", discrete ? "z = exp(2 pi i k / grid)"
                             : "s = i w, w = 0 and grid log-spaced in [1e-3, 1e3] |abscissa|");

  std::vector<std::string> notes;
  if (discrete) {
    notes.emplace_back(
        "factorizationDeviationUncorrectedDbar uses Dbar = D J' without the C P Bbar "
        "term; it is reported for comparison and does not affect pass");
  } else {
    notes.emplace_back(
        "allpassDeviationPlusSign evaluates I + Bbar' (sI - A)^-1 B, i.e. dubar = du + "
        "Bbar' x dt; the all-pass output map requires the minus sign");
    notes.emplace_back(
        "the resolvent in U(s) is (sI - A)^-1 in x-coordinates; (sI - A')^-1 does not "
        "match the normalized realization H (sI - F)^-1 G + J");
  }

  auto compact = [](const DocumentWriter& w) {
    // Nested objects are written inline to keep one top-level key per line.
    std::string s = w.str();
    std::string out;
    for (char c : s) {
      if (c == '\n') continue;
      out += c;
    }
    std::string squeezed;
    bool space = false;
    for (char c : out) {
      if (c == ' ') {
        if (!space) squeezed += c;
        space = true;
      } else {
        squeezed += c;
        space = false;
      }
    }
    return squeezed;
  };

  DocumentWriter w;
  w.text("command", "verify")
      .text("toolVersion", kToolVersion)
      .text("timeDomain", to_string(r.time_domain))
      .integer("grid", static_cast<long long>(r.grid))
      .number("tolerance", r.tolerance)
      .boolean("pass", r.pass)
      .number("lyapunovResidual", r.lyapunov_residual)
      .number("completionOrthogonality", r.completion_orthogonality)
      .number("backwardGramianResidual", r.backward_gramian_residual)
      .number("spectrumDeviation", r.spectrum_deviation)
      .number("allpassDeviation", r.allpass_deviation);
  if (r.allpass_deviation_plus_sign) {
    w.number("allpassDeviationPlusSign", *r.allpass_deviation_plus_sign);
  }
  w.number("factorizationDeviation", r.factorization_deviation)
      .number("factorizationDeviationUncorrectedDbar", r.factorization_deviation_uncorrected_dbar)
      .integer("skippedGridPoints", static_cast<long long>(r.skipped_grid_points))
      .field("tolerances", compact(tolerances))
      .field("conventions", compact(conventions))
      .field("notes", render_messages(notes));
  return w.str();
}

// ---------------------------------------------------------------------------
// commands

int cmd_validate(const std::string& model_file, std::ostream& out, std::ostream& err) {
  try {
    ValidationReport report;
    const ForwardModel model = load_valid_model(model_file, err, &report);
    out << render_validation(report, model.time_domain);
    if (report.pass()) err << "model is valid\n";
    return report.pass() ? kOk : kValidationFailure;
  } catch (const LoadFailure& f) {
    return f.code;
  }
}

int cmd_reverse(const std::string& model_file, const std::optional<std::string>& out_file,
                std::ostream& out, std::ostream& err) {
  ForwardModel model;
  try {
    ValidationReport report;
    model = load_valid_model(model_file, err, &report);
    if (!report.pass()) return kValidationFailure;
  } catch (const LoadFailure& f) {
    return f.code;
  }

  ReversalResult result;
  try {
    result = reverse(model);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }

  DocumentWriter w;
  const BackwardModel& b = result.backward;
  const AllPassExtension& ext = result.extension;
  w.text("time_domain", to_string(b.time_domain))
      .text("direction", BackwardModel::kDirection)
      .text("gauge", b.gauge)
      .matrix("Abar", b.Abar)
      .matrix("Bbar", b.Bbar)
      .matrix("Cbar", b.Cbar)
      .matrix("Dbar", b.Dbar)
      .matrix("P", ext.gramian.P)
      .matrix("S", ext.gramian.S)
      .matrix("Pinv", ext.gramian.Pinv)
      .matrix("F", ext.F)
      .matrix("G", ext.G)
      .matrix("H", ext.H)
      .matrix("J", ext.J)
      .text("tool_version", kToolVersion);
  const std::string doc = w.str();

  if (out_file) {
    std::ofstream file(*out_file, std::ios::binary);
    if (!(file << doc) || !file.flush()) {
      err << "error: cannot write " << *out_file << '\n';
      return kIoFailure;
    }
    err << "backward model written to " << *out_file << '\n';
  } else {
    out << doc;
  }
  return kOk;
}

int cmd_verify(const std::string& model_file, const VerifyOptions& options, std::ostream& out,
               std::ostream& err) {
  ForwardModel model;
  try {
    ValidationReport report;
    model = load_valid_model(model_file, err, &report);
    if (!report.pass()) return kValidationFailure;
  } catch (const LoadFailure& f) {
    return f.code;
  }
  if (options.grid && *options.grid < 2) {
    err << "error: --grid must be at least 2\n";
    return kIoFailure;
  }

  VerifyReport r;
  try {
    r = build_verify_report(model, options);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailure;
  }
  out << render_verify_report(r);
  err << (r.pass ? "verification passed" : "verification FAILED")
      << ": all-pass deviation " << render_number(r.allpass_deviation)
      << ", factorization deviation " << render_number(r.factorization_deviation)
      << " (uncorrected Dbar: " << render_number(r.factorization_deviation_uncorrected_dbar)
      << ")\n";
  return r.pass ? kOk : kVerificationFailure;
}

int cmd_simulate(const std::string& model_file, const SimulateOptions& options,
                 std::ostream& out, std::ostream& err) {
  ForwardModel model;
  try {
    ValidationReport report;
    model = load_valid_model(model_file, err, &report);
    if (!report.pass()) return kValidationFailure;
  } catch (const LoadFailure& f) {
    return f.code;
  }
  const bool continuous = model.time_domain == TimeDomain::kContinuous;
  if (continuous && !options.dt) {
    err << "error: continuous-time simulation requires --dt\n";
    return kIoFailure;
  }
  if (options.steps < 1 || options.lags < 1) {
    err << "error: --steps and --lags must be positive\n";
    return kIoFailure;
  }

  ReversalResult result;
  try {
    result = reverse(model);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }

  StatReport s;
  try {
    s = run_statistics(result, options.seed, options.steps, options.lags,
                       continuous ? options.dt : std::nullopt);
  } catch (const InsufficientData& e) {
    err << "error: InsufficientData: " << e.what() << '\n';
    return kVerificationFailure;
  } catch (const StepTooLarge& e) {
    err << "error: StepTooLarge: " << e.what() << '\n';
    return kIoFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailure;
  }

  if (options.emit_paths) {
    const SamplePath path = continuous
                                ? simulate_continuous(result, options.seed, options.steps, *options.dt)
                                : simulate_discrete(result, options.seed, options.steps);
    std::ofstream file(*options.emit_paths, std::ios::binary);
    if (file) write_path_dump(file, path);
    if (!file || !file.flush()) {
      err << "error: cannot write " << *options.emit_paths << '\n';
      return kIoFailure;
    }
  }

  DocumentWriter w;
  w.text("command", "simulate")
      .text("toolVersion", kToolVersion)
      .text("timeDomain", to_string(s.time_domain))
      .text("generatorId", s.generator_id)
      .integer("seed", static_cast<long long>(s.seed))
      .integer("steps", s.steps)
      .integer("lags", s.lags)
      .number("dt", s.step)
      .boolean("pass", s.pass())
      .number("roundtripError", s.roundtrip_error)
      .number("outputMismatch", s.output_mismatch)
      .number("maxAutocorrDeviation", s.max_autocorr_deviation);
  if (!continuous) w.number("reverseAutocorrDeviation", s.reverse_autocorr_deviation);
  w.number("covarianceRelError", s.covariance_rel_error)
      .number("backwardCovarianceRelError", s.backward_covariance_rel_error)
      .number("crossOrthMax", s.cross_orth_max)
      .number("futureLagStatistic", s.future_lag_statistic);
  if (continuous) w.number("incrementCovarianceExcess", s.increment_excess);
  w.number("roundtripThreshold", s.thresholds.roundtrip)
      .number("outputThreshold", s.thresholds.output)
      .number("whitenessThreshold", s.thresholds.whiteness)
      .number("covarianceThreshold", s.thresholds.covariance)
      .number("orthogonalityThreshold", s.thresholds.orthogonality);
  if (continuous) w.number("incrementExcessThreshold", s.thresholds.increment_excess);
  w.boolean("roundtripPass", s.roundtrip_pass)
      .boolean("whitenessPass", s.whiteness_pass)
      .boolean("covariancePass", s.covariance_pass)
      .boolean("orthogonalityPass", s.orthogonality_pass);
  if (continuous) w.boolean("incrementPass", s.increment_pass);
  out << w.str();
  err << (s.pass() ? "statistical checks passed\n" : "statistical checks FAILED\n");
  return s.pass() ? kOk : kVerificationFailure;
}

}  // namespace retrovert::cli
