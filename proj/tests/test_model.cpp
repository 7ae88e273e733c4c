#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "retrovert/error.hpp"
#include "retrovert/model.hpp"
#include "retrovert/reversal.hpp"
#include "support/random_models.hpp"

using namespace retrovert;

namespace {

constexpr const char* kMinimal =
    R"({"time_domain":"discrete","A":[[0.5]],"B":[[1.0]],"C":[[1.0]],"D":[[0.0]]})";

bool mentions(const ValidationReport& r, const std::string& word) {
  for (const auto& m : r.messages)
    if (m.find(word) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Validate, ScalarModelPasses) {
  const ValidationReport r = validate(testkit::scalar_discrete());
  EXPECT_TRUE(r.pass());
  EXPECT_TRUE(r.messages.empty());
  EXPECT_NEAR(r.stability_margin, 0.5, 1e-15);
  EXPECT_EQ(r.reachability_rank, 1);
}

TEST(Validate, UnitEigenvalueFailsStability) {
  ForwardModel m = testkit::scalar_discrete();
  m.A(0, 0) = 1.0;
  const ValidationReport r = validate(m);
  EXPECT_FALSE(r.pass());
  EXPECT_FALSE(r.stable);
  EXPECT_TRUE(mentions(r, "stability"));
}

TEST(Validate, ContinuousStabilityUsesAbscissa) {
  ForwardModel m = testkit::scalar_continuous();
  EXPECT_TRUE(validate(m).pass());
  m.A(0, 0) = 0.0;
  EXPECT_FALSE(validate(m).stable);
}

TEST(Validate, UnreachableFails) {
  ForwardModel m;
  m.A = 0.5 * Matrix::Identity(2, 2);
  m.B = Matrix::Zero(2, 1);
  m.B(0, 0) = 1.0;
  m.C = Matrix::Identity(2, 2);
  m.D = Matrix::Zero(2, 1);
  const ValidationReport r = validate(m);
  EXPECT_FALSE(r.reachable);
  EXPECT_EQ(r.reachability_rank, 1);
  EXPECT_TRUE(mentions(r, "reachability"));
}

TEST(Validate, RankDeficientInputFails) {
  ForwardModel m;
  m.A = 0.5 * Matrix::Identity(2, 2);
  m.A(0, 1) = 0.1;
  m.B = Matrix::Ones(2, 2);
  m.C = Matrix::Identity(1, 2);
  m.D = Matrix::Zero(1, 2);
  const ValidationReport r = validate(m);
  EXPECT_FALSE(r.full_rank_b);
  EXPECT_FALSE(r.pass());
}

TEST(Validate, DimensionAndFinitenessGuards) {
  ForwardModel m = testkit::scalar_discrete();
  m.D = Matrix::Zero(2, 1);
  EXPECT_FALSE(validate(m).dimension_ok);
  m = testkit::scalar_discrete();
  m.B(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(validate(m).finite);
}

TEST(Validate, DoesNotMutateAndIsRepeatable) {
  const ForwardModel m = testkit::ensemble_model(5);
  const ForwardModel copy = m;
  const ValidationReport a = validate(m);
  const ValidationReport b = validate(m);
  EXPECT_EQ(m.A, copy.A);
  EXPECT_EQ(a.messages, b.messages);
  EXPECT_EQ(a.stability_margin, b.stability_margin);
  EXPECT_EQ(a.pass(), b.pass());
}

TEST(Parse, MinimalDocument) {
  const ForwardModel m = parse_model(kMinimal);
  EXPECT_EQ(m.time_domain, TimeDomain::kDiscrete);
  EXPECT_EQ(m.states(), 1);
  EXPECT_EQ(m.inputs(), 1);
  EXPECT_EQ(m.outputs(), 1);
  EXPECT_EQ(m.A(0, 0), 0.5);
}

TEST(Parse, MissingKeyNamesIt) {
  try {
    parse_model(R"({"time_domain":"discrete","A":[[0.5]],"B":[[1.0]],"D":[[0.0]]})");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.key(), "C");
  }
}

TEST(Parse, BadEnum) {
  try {
    parse_model(R"({"time_domain":"weekly","A":[[0.5]],"B":[[1]],"C":[[1]],"D":[[0]]})");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.key(), "time_domain");
    EXPECT_NE(std::string(e.what()).find("enum"), std::string::npos);
  }
}

TEST(Parse, ExtraKeyRejected) {
  try {
    parse_model(R"({"time_domain":"discrete","A":[[0.5]],"B":[[1]],"C":[[1]],"D":[[0]],"E":1})");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.key(), "E");
  }
}

TEST(Parse, MalformedJsonReportsLine) {
  try {
    parse_model("{\n  \"time_domain\": \"discrete\",\n  \"A\": [[0.5]\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Parse, RaggedAndIllTypedMatrices) {
  EXPECT_THROW(
      parse_model(R"({"time_domain":"discrete","A":[[0.5,1],[1]],"B":[[1]],"C":[[1]],"D":[[0]]})"),
      SchemaError);
  EXPECT_THROW(
      parse_model(R"({"time_domain":"discrete","A":[["x"]],"B":[[1]],"C":[[1]],"D":[[0]]})"),
      SchemaError);
  EXPECT_THROW(parse_model(R"({"time_domain":"discrete","A":[],"B":[[1]],"C":[[1]],"D":[[0]]})"),
               SchemaError);
  EXPECT_THROW(parse_model("[1, 2]"), SchemaError);
}

TEST(Parse, OptionalStrings) {
  const ForwardModel m = parse_model(
      R"({"time_domain":"continuous","name":"ou","description":"scalar","A":[[-1]],"B":[[1]],"C":[[1]],"D":[[0]]})");
  EXPECT_EQ(m.name.value_or(""), "ou");
  EXPECT_EQ(m.description.value_or(""), "scalar");
  EXPECT_THROW(
      parse_model(R"({"time_domain":"discrete","name":3,"A":[[0.5]],"B":[[1]],"C":[[1]],"D":[[0]]})"),
      SchemaError);
}

TEST(Serialize, CanonicalForm) {
  const std::string doc = serialize_model(parse_model(kMinimal));
  EXPECT_EQ(doc,
            "{\n"
            "  \"time_domain\": \"discrete\",\n"
            "  \"A\": [[0.5]],\n"
            "  \"B\": [[1.0]],\n"
            "  \"C\": [[1.0]],\n"
            "  \"D\": [[0.0]]\n"
            "}\n");
}

TEST(Serialize, BackwardDirection) {
  const ReversalResult r = reverse(testkit::scalar_discrete());
  const std::string doc = serialize_model(r.backward);
  EXPECT_NE(doc.find("\"direction\": \"reverse-time\""), std::string::npos);
  const BackwardModel back = parse_backward_model(doc);
  EXPECT_EQ(back.Cbar, r.backward.Cbar);
  EXPECT_EQ(back.Dbar, r.backward.Dbar);
  EXPECT_EQ(back.gauge, r.backward.gauge);
}

TEST(Serialize, RenderNumberIsShortestRoundTrip) {
  EXPECT_EQ(render_number(1.0), "1.0");
  EXPECT_EQ(render_number(0.1), "0.1");
  EXPECT_EQ(render_number(-2.5e-300), "-2.5e-300");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(render_number(v)), v);
  }
}

TEST(SerializeProperty, ParseSerializeRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    ForwardModel m = testkit::ensemble_model(seed);
    if (seed % 3 == 0) m.name = "model \"" + std::to_string(seed) + "\"";
    const std::string once = serialize_model(m);
    const ForwardModel back = parse_model(once);
    EXPECT_EQ(back.A, m.A);
    EXPECT_EQ(back.B, m.B);
    EXPECT_EQ(back.C, m.C);
    EXPECT_EQ(back.D, m.D);
    EXPECT_EQ(back.time_domain, m.time_domain);
    EXPECT_EQ(back.name, m.name);
    EXPECT_EQ(serialize_model(back), once);
  }
}

TEST(SerializeProperty, IdempotentAfterFirstPass) {
  const std::string messy =
      R"({ "D":[[0]], "C":[[1e0]], "B":[[ 1.000 ]], "A":[[5e-1]], "time_domain":"discrete" })";
  const std::string first = serialize_model(parse_model(messy));
  EXPECT_EQ(serialize_model(parse_model(first)), first);
}
