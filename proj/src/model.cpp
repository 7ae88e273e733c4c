#include "retrovert/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "json.hpp"
#include "retrovert/error.hpp"

namespace retrovert {

using nlohmann::json;

std::string_view to_string(TimeDomain domain) {
  return domain == TimeDomain::kDiscrete ? "discrete" : "continuous";
}

// ---------------------------------------------------------------------------
// validation

ValidationReport validate(const ForwardModel& model) {
  ValidationReport r;
  const Matrix& A = model.A;
  const Matrix& B = model.B;
  const Matrix& C = model.C;
  const Matrix& D = model.D;
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  const Eigen::Index m = C.rows();

  r.dimension_ok = n > 0 && A.cols() == n && B.rows() == n && p > 0 &&
                   C.cols() == n && m > 0 && D.rows() == m && D.cols() == p;
  if (!r.dimension_ok) {
    r.messages.push_back(
        "dimensions: expected A n x n, B n x p, C m x n, D m x p with n, p, m >= 1");
    return r;
  }
  if (n > kMaxStateDimension) {
    r.dimension_ok = false;
    r.messages.push_back("dimensions: n = " + std::to_string(n) +
                         " exceeds the supported maximum of " +
                         std::to_string(kMaxStateDimension));
    return r;
  }
  r.finite = A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite();
  if (!r.finite) {
    r.messages.push_back("entries: all matrix entries must be finite");
    return r;
  }

  try {
    if (model.time_domain == TimeDomain::kDiscrete) {
      const double rho = spectral_radius(A);
      r.stability_margin = 1.0 - rho;
      r.stable = rho < 1.0 - kStabilityMargin;
      if (!r.stable) {
        r.messages.push_back("stability: spectral radius " + render_number(rho) +
                             " is not below 1 - 1e-8");
      }
    } else {
      const double alpha = spectral_abscissa(A);
      r.stability_margin = -alpha;
      r.stable = alpha < -kStabilityMargin;
      if (!r.stable) {
        r.messages.push_back("stability: spectral abscissa " + render_number(alpha) +
                             " is not below -1e-8");
      }
    }
  } catch (const NumericalFailure& e) {
    r.stable = false;
    r.messages.push_back(std::string("stability: ") + e.what());
  }

  r.reachability_rank = reachability_rank(A, B);
  r.reachable = r.reachability_rank == n;
  if (!r.reachable) {
    r.messages.push_back("reachability: rank " + std::to_string(r.reachability_rank) +
                         " < n = " + std::to_string(n));
  }

  const Eigen::Index brank = numeric_rank(B);
  r.full_rank_b = brank == std::min(n, p);
  if (!r.full_rank_b) {
    r.messages.push_back("input matrix: rank(B) = " + std::to_string(brank) +
                         " < min(n, p) = " + std::to_string(std::min(n, p)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text,
                                                    std::size_t byte) {
  // nlohmann reports a 1-based byte position of the offending character.
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

json parse_document(std::string_view text) {
  try {
    json doc = json::parse(text.begin(), text.end());
    if (!doc.is_object()) {
      throw SchemaError("<root>", "document must be a JSON object");
    }
    return doc;
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw ParseError(e.what(), line, column);
  }
}

Matrix read_matrix(const json& doc, const std::string& key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw SchemaError(key, "missing required key");
  const json& rows = *it;
  if (!rows.is_array() || rows.empty()) {
    throw SchemaError(key, "expected a nonempty array of rows");
  }
  const std::size_t ncols = rows.front().is_array() ? rows.front().size() : 0;
  if (ncols == 0) throw SchemaError(key, "expected nonempty rows");

  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& row = rows[i];
    if (!row.is_array() || row.size() != ncols) {
      throw SchemaError(key, "row " + std::to_string(i) + " has the wrong length");
    }
    for (std::size_t j = 0; j < ncols; ++j) {
      if (!row[j].is_number()) {
        throw SchemaError(key, "entry (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ") is not a number");
      }
      const double v = row[j].get<double>();
      if (!std::isfinite(v)) {
        throw SchemaError(key, "entry (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ") is not finite");
      }
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return M;
}

TimeDomain read_time_domain(const json& doc) {
  const auto it = doc.find("time_domain");
  if (it == doc.end()) throw SchemaError("time_domain", "missing required key");
  if (it->is_string()) {
    const auto& s = it->get_ref<const std::string&>();
    if (s == "discrete") return TimeDomain::kDiscrete;
    if (s == "continuous") return TimeDomain::kContinuous;
  }
  throw SchemaError("time_domain", "enum: expected \"discrete\" or \"continuous\"");
}

std::optional<std::string> read_optional_string(const json& doc, const std::string& key) {
  const auto it = doc.find(key);
  if (it == doc.end()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(key, "expected a string");
  return it->get<std::string>();
}

template <std::size_t N>
void reject_unknown_keys(const json& doc, const std::array<std::string_view, N>& allowed) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SchemaError(key, "unexpected key");
    }
  }
}

}  // namespace

ForwardModel parse_model(std::string_view text) {
  const json doc = parse_document(text);
  static constexpr std::array<std::string_view, 7> kAllowed = {
      "time_domain", "A", "B", "C", "D", "name", "description"};
  reject_unknown_keys(doc, kAllowed);

  ForwardModel model;
  model.time_domain = read_time_domain(doc);
  model.A = read_matrix(doc, "A");
  model.B = read_matrix(doc, "B");
  model.C = read_matrix(doc, "C");
  model.D = read_matrix(doc, "D");
  model.name = read_optional_string(doc, "name");
  model.description = read_optional_string(doc, "description");
  return model;
}

BackwardModel parse_backward_model(std::string_view text) {
  const json doc = parse_document(text);
  // The reverse command appends Gramian and completion data; accept and ignore it.
  static constexpr std::array<std::string_view, 15> kAllowed = {
      "time_domain", "direction", "gauge", "Abar", "Bbar", "Cbar", "Dbar", "P",
      "S",           "Pinv",      "F",     "G",    "H",    "J",    "tool_version"};
  reject_unknown_keys(doc, kAllowed);

  const auto dir = doc.find("direction");
  if (dir == doc.end() || !dir->is_string() ||
      dir->get_ref<const std::string&>() != BackwardModel::kDirection) {
    throw SchemaError("direction", "expected \"reverse-time\"");
  }
  BackwardModel model;
  model.time_domain = read_time_domain(doc);
  model.gauge = read_optional_string(doc, "gauge").value_or("");
  model.Abar = read_matrix(doc, "Abar");
  model.Bbar = read_matrix(doc, "Bbar");
  model.Cbar = read_matrix(doc, "Cbar");
  model.Dbar = read_matrix(doc, "Dbar");
  return model;
}

// ---------------------------------------------------------------------------
// serialization

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

std::string render_number(double value) {
  // nlohmann renders doubles as the shortest string that round-trips.
  return json(value).dump();
}

std::string render_matrix(const Matrix& M) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (i > 0) out += ", ";
    out += '[';
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out += ", ";
      out += render_number(M(i, j));
    }
    out += ']';
  }
  out += ']';
  return out;
}

DocumentWriter& DocumentWriter::field(std::string_view key, std::string_view json_fragment) {
  fields_.emplace_back(std::string(key), std::string(json_fragment));
  return *this;
}

DocumentWriter& DocumentWriter::text(std::string_view key, std::string_view value) {
  return field(key, quote(value));
}

DocumentWriter& DocumentWriter::number(std::string_view key, double value) {
  return field(key, std::isfinite(value) ? render_number(value) : "null");
}

DocumentWriter& DocumentWriter::integer(std::string_view key, long long value) {
  return field(key, std::to_string(value));
}

DocumentWriter& DocumentWriter::boolean(std::string_view key, bool value) {
  return field(key, value ? "true" : "false");
}

DocumentWriter& DocumentWriter::matrix(std::string_view key, const Matrix& M) {
  return field(key, render_matrix(M));
}

std::string DocumentWriter::str() const {
  std::string out = "{\n";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    out += "  ";
    out += quote(fields_[i].first);
    out += ": ";
    out += fields_[i].second;
    if (i + 1 < fields_.size()) out += ',';
    out += '\n';
  }
  out += "}\n";
  return out;
}

std::string serialize_model(const ForwardModel& model) {
  DocumentWriter w;
  w.text("time_domain", to_string(model.time_domain));
  if (model.name) w.text("name", *model.name);
  if (model.description) w.text("description", *model.description);
  w.matrix("A", model.A).matrix("B", model.B).matrix("C", model.C).matrix("D", model.D);
  return w.str();
}

std::string serialize_model(const BackwardModel& model) {
  DocumentWriter w;
  w.text("time_domain", to_string(model.time_domain));
  w.text("direction", BackwardModel::kDirection);
  w.text("gauge", model.gauge);
  w.matrix("Abar", model.Abar)
      .matrix("Bbar", model.Bbar)
      .matrix("Cbar", model.Cbar)
      .matrix("Dbar", model.Dbar);
  return w.str();
}

}  // namespace retrovert
