#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "riccati_lab/cases.hpp"
#include "riccati_lab/errors.hpp"

using namespace riccati_lab;

namespace {

constexpr double kErfiIntegral = 0.4223975889932355;  // int_0^0.4 exp(t^2) dt

CaseSpec trivial_case1() { return make_spec(1, {{"a", "0"}, {"b", "0"}, {"c", "1"}, {"f", "0"}}); }

CaseSpec case1_f4() {
  return make_spec(1, {{"b", "0"}, {"c", "1"}, {"f", "4"}}, {{"C1", 0.0}});
}

CaseSpec case7_f2() { return make_spec(7, {{"b", "0"}, {"c", "1"}, {"f", "2"}}); }

CaseSpec case10_f1(int branch) {
  return make_spec(10, {{"b", "0"}, {"c", "1"}, {"f", "1"}}, {}, branch);
}

}  // namespace

TEST(CaseTable, MatchesShippedManifest) {
  std::ifstream in(std::string(RICCATI_LAB_SOURCE_DIR) + "/docs/case_manifest.json");
  ASSERT_TRUE(in) << "manifest missing";
  const auto manifest = nlohmann::json::parse(in);
  const auto& rows = manifest.at("cases");
  ASSERT_EQ(rows.size(), case_table().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CaseInfo& info = case_table()[i];
    const auto& row = rows[i];
    EXPECT_EQ(row.at("id").get<int>(), info.id);
    EXPECT_EQ(row.at("solves_for").get<std::string>(), std::string(1, to_char(info.solves_for)));
    std::vector<std::string> free;
    for (Coefficient k : info.free) free.emplace_back(1, to_char(k));
    EXPECT_EQ(row.at("free").get<std::vector<std::string>>(), free);
    EXPECT_EQ(row.at("generating").get<std::string>(), info.generating);
    EXPECT_EQ(row.at("constants").get<std::vector<std::string>>(), info.constants);
    EXPECT_EQ(row.at("branch").get<bool>(), info.branch);
    EXPECT_EQ(row.at("differential").get<bool>(), info.differential);
    EXPECT_EQ(row.at("family_constant").get<std::string>(), info.theorem_constant);
  }
}

TEST(CaseSchema, RejectsWrongInputs) {
  EXPECT_THROW(construct(trivial_case1()), SpecError);  // a is solved for
  EXPECT_THROW(construct(make_spec(1, {{"b", "0"}, {"c", "1"}})), SpecError);
  EXPECT_THROW(construct(make_spec(1, {{"c", "1"}, {"f", "0"}})), SpecError);
  EXPECT_THROW(construct(make_spec(1, {{"b", "0"}, {"c", "1"}, {"f", "0"}}, {{"C3", 1.0}})),
               SpecError);
  EXPECT_THROW(construct(make_spec(2, {{"b", "0"}, {"c", "1"}, {"f", "1"}})), SpecError);
  EXPECT_THROW(construct(make_spec(7, {{"b", "0"}, {"c", "1"}, {"f", "2"}}, {}, 1)), SpecError);
  EXPECT_THROW(construct(make_spec(2, {{"b", "0"}, {"c", "1"}, {"f", "1"}}, {}, 2)), SpecError);
  EXPECT_THROW(make_spec(11, {}), SpecError);
  EXPECT_THROW(case_info(0), SpecError);
  EXPECT_THROW(make_spec(1, {{"g", "1"}}), SpecError);
  EXPECT_THROW(construct(make_spec(1, {{"b", "0"}, {"c", "1"}, {"f", "0"}}, {}, std::nullopt,
                                   {1.0, 0.0})),
               SpecError);
}

TEST(Construct, TrivialCaseOne) {
  const CaseSpec s = make_spec(1, {{"b", "0"}, {"c", "1"}, {"f", "0"}}, {{"C1", 0.0}});
  const ConstructedCase cc = construct(s);
  for (double x : {0.0, 0.3, 0.9}) {
    EXPECT_NEAR(cc.problem.a()(x), 0.0, 1e-15);
    EXPECT_NEAR(cc.y_p(x), 0.0, 1e-15);
  }
  EXPECT_NEAR(cc.general(2.0, 0.5), 1.0 / 1.5, 1e-14);
  EXPECT_NEAR(cc.theorem(2.0, 0.5), 1.0 / 1.5, 1e-14);
  EXPECT_EQ(cc.theorem.constant_name(), "C0");
  EXPECT_LE(cc.condition_residual, 1e-15);
  EXPECT_LE(cc.particular_residual, 1e-12);
  EXPECT_LE(seed_relation_check(cc), 1e-15);
}

TEST(Construct, CaseOneWithConstantGenerator) {
  const ConstructedCase cc = construct(case1_f4());
  for (double x : {0.0, 0.25, 0.6, 1.0}) {
    EXPECT_NEAR(cc.y_p(x), x, 1e-12);
    EXPECT_NEAR(cc.problem.a()(x), 1.0 - x * x, 1e-12);
    EXPECT_NEAR(cc.problem.a()(x) + cc.y_p(x) * cc.y_p(x), 1.0, 1e-12);
  }
  const double C = 1.0;
  const double expected = std::exp(0.16) / (C - kErfiIntegral) + 0.4;
  EXPECT_NEAR(cc.general(C, 0.4), expected, 1e-10);
  EXPECT_NEAR(cc.theorem(C, 0.4), expected, 1e-10);
  EXPECT_LE(cc.condition_residual, 1e-9);
  EXPECT_LE(seed_relation_check(cc), 1e-8);
  const auto cmp = compare_with_oracle(cc.problem, cc.general, 0.0, cc.general(C, 0.0));
  EXPECT_LE(cmp.sup_rel_err, 1e-6);
}

TEST(Construct, CaseSevenConstantCoefficients) {
  const ConstructedCase cc = construct(case7_f2());
  for (double x : {0.0, 0.5, 1.0}) {
    EXPECT_NEAR(cc.problem.a()(x), -1.0, 1e-14);
    EXPECT_NEAR(cc.y_p(x), 1.0, 1e-14);
  }
  // e^{2x} / (C - (e^{2x} - 1)/2) + 1 is identically -1 at C = -1/2.
  for (double x : {0.0, 0.3, 0.8}) {
    EXPECT_NEAR(cc.theorem(-0.5, x), -1.0, 1e-12);
    EXPECT_NEAR(cc.general(-0.5, x), -1.0, 1e-12);
    const double expected = std::exp(2 * x) / (2.0 - 0.5 * std::expm1(2 * x)) + 1.0;
    EXPECT_NEAR(cc.theorem(2.0, x), expected, 1e-12 * (1.0 + std::fabs(expected)));
  }
  EXPECT_EQ(cc.theorem.constant_name(), "C10");
  EXPECT_LE(cc.condition_residual, 1e-15);
  EXPECT_LE(validate_condition(cc), 1e-15);
}

TEST(Construct, CaseTenCoincidesWithCaseSeven) {
  const ConstructedCase c10 = construct(case10_f1(+1));
  const ConstructedCase c7 = construct(case7_f2());
  for (double x : {0.0, 0.5, 1.0}) {
    EXPECT_NEAR(c10.problem.a()(x), -1.0, 1e-14);
    EXPECT_NEAR(c10.y_p(x), 1.0, 1e-14);
  }
  EXPECT_LE(seed_relation_check(c10), 1e-14);
  for (double C : {-0.5, 0.9, 3.0}) {
    const double C7 = c7.theorem.constant_for(0.0, c10.theorem(C, 0.0));
    for (double x : {0.1, 0.4, 0.95})
      EXPECT_NEAR(c10.theorem(C, x), c7.theorem(C7, x), 1e-10 * (1 + std::fabs(c7.theorem(C7, x))));
  }
}

TEST(Construct, GuardsFailLoudly) {
  // J = 1.25 x vanishes at the left end.
  try {
    construct(make_spec(3, {{"a", "1"}, {"c", "1"}, {"f", "1"}}, {{"C3", 0.0}}, -1));
    FAIL() << "expected GuardViolation";
  } catch (const GuardViolation& g) {
    EXPECT_NE(g.guard().find("bracket"), std::string::npos);
    EXPECT_NEAR(g.x(), 0.0, 1e-12);
  }
  try {
    construct(make_spec(2, {{"b", "0"}, {"c", "1"}, {"f", "0.5 - x"}}, {}, 1));
    FAIL() << "expected RadicandNegative";
  } catch (const RadicandNegative& r) {
    EXPECT_NEAR(r.x(), 0.5, 1e-9);
  }
  try {
    construct(make_spec(7, {{"b", "0"}, {"c", "x - 0.3"}, {"f", "1"}}));
    FAIL() << "expected GuardViolation";
  } catch (const GuardViolation& g) {
    EXPECT_NEAR(g.x(), 0.3, 1e-9);
  }
  EXPECT_THROW(construct(make_spec(8, {{"a", "1"}, {"c", "1"}, {"f", "x - 0.5"}})), GuardViolation);
  EXPECT_THROW(construct(make_spec(9, {{"a", "0"}, {"b", "0"}, {"f", "1"}}, {{"C12", 0.0}})),
               GuardViolation);
}

TEST(Construct, ConditionRoutesAgreeForEveryCase) {
  const std::vector<CaseSpec> specs = {
      make_spec(1, {{"b", "x"}, {"c", "1 + x^2"}, {"f", "sin(x)"}}, {{"C1", 0.5}}),
      make_spec(2, {{"b", "x"}, {"c", "2 + cos(x)"}, {"f", "1 + x^2"}}, {}, 1),
      make_spec(3, {{"a", "-1"}, {"c", "1"}, {"f", "1 + 0.2*x"}}, {{"C3", 0.5}}, -1),
      make_spec(4, {{"a", "1 + x"}, {"b", "0.5"}, {"f", "2 + x"}}, {{"C5", 1.0}}, 1),
      make_spec(5, {{"b", "1"}, {"c", "1"}, {"f", "1 + x"}}, {{"C7", -1.0}}),
      make_spec(6, {{"a", "0.3"}, {"c", "1"}, {"f", "1 + x"}}, {{"C7", 1.0}}),
      make_spec(7, {{"b", "x"}, {"c", "1 + x"}, {"f", "exp(x)"}}),
      make_spec(8, {{"a", "0.2"}, {"c", "1 + x"}, {"f", "2 + sin(x)"}}),
      make_spec(9, {{"a", "1"}, {"b", "x"}, {"f", "1 + x^2"}}, {{"C12", 1.0}}),
      make_spec(10, {{"b", "x"}, {"c", "1 + x"}, {"f", "cos(x)"}}, {}, -1),
  };
  for (const CaseSpec& s : specs) {
    SCOPED_TRACE(describe(s));
    const ConstructedCase cc = construct(s);
    EXPECT_LE(cc.condition_residual, 1e-9);
    EXPECT_LE(cc.particular_residual, 1e-6);
    EXPECT_LE(seed_relation_check(cc), 1e-6);
    const CaseMetrics m = evaluate_case(cc, {-2.0, 0.7, 2.5});
    EXPECT_TRUE(m.passes(Tolerances{})) << "family " << m.family << " oracle " << m.oracle
                                        << " theorem " << m.theorem_vs_gs;
  }
}

TEST(Construct, NumericInputsTakeTheChainRuleRoute) {
  const Interval I{0.0, 1.0};
  CaseSpec s = make_spec(7, {{"b", "x"}});
  s.c = ScalarFunction([](double x) { return 1.0 + x; }, I);
  s.f = ScalarFunction([](double x) { return std::exp(x); }, I);
  const ConstructedCase numeric = construct(s);
  const ConstructedCase symbolic =
      construct(make_spec(7, {{"b", "x"}, {"c", "1 + x"}, {"f", "exp(x)"}}));
  for (double x : {0.1, 0.5, 0.9})
    EXPECT_NEAR(numeric.problem.a()(x), symbolic.problem.a()(x), 1e-8);
}

TEST(Construct, BranchConsistency) {
  const ConstructedCase p10 = construct(
      make_spec(10, {{"b", "x"}, {"c", "1 + x"}, {"f", "cos(x)"}}, {}, 1));
  const ConstructedCase m10 = construct(
      make_spec(10, {{"b", "x"}, {"c", "1 + x"}, {"f", "cos(x)"}}, {}, -1));
  for (double x : linspace(0.0, 1.0, 33))
    EXPECT_NEAR(p10.y_p(x) - m10.y_p(x), 2.0 * std::cos(x), 1e-13);

  for (int id : {2, 4}) {
    SCOPED_TRACE(id);
    auto make = [id](int sigma) {
      return id == 2 ? make_spec(2, {{"b", "x"}, {"c", "1"}, {"f", "1 + x^2"}}, {}, sigma)
                     : make_spec(4, {{"a", "1"}, {"b", "0.5"}, {"f", "1 + x"}}, {{"C5", 1.0}},
                                 sigma);
    };
    const ConstructedCase p = construct(make(1));
    const ConstructedCase m = construct(make(-1));
    // Case 4 roots share y_p(x0) = C5, so the sign is checked past the base point.
    const auto xs = linspace(0.0, 1.0, 65);
    const std::size_t start = id == 4 ? 1 : 0;
    const double first = p.y_p(xs[start]) - m.y_p(xs[start]);
    EXPECT_GT(std::fabs(first), 1e-4);
    for (std::size_t i = start; i < xs.size(); ++i)
      EXPECT_GT((p.y_p(xs[i]) - m.y_p(xs[i])) * first, 0.0) << xs[i];
    if (id == 4) EXPECT_EQ(p.y_p(0.0), m.y_p(0.0));
  }
}

TEST(Construct, ClassicalRoundTrip) {
  // a = 1 - x^2, b = 0, c = 1: no classical structure.
  const ClassicalReport r1 = detect_classical(construct(case1_f4()).problem);
  EXPECT_FALSE(r1.sum_zero);
  EXPECT_FALSE(r1.lambda_mu);
  EXPECT_FALSE(r1.constant_discriminant);
  EXPECT_TRUE(r1.unit_c);

  // a = -1, b = 0, c = 1: every flag genuinely holds.
  const ClassicalReport r7 = detect_classical(construct(case7_f2()).problem);
  EXPECT_TRUE(r7.sum_zero);
  EXPECT_TRUE(r7.lambda_mu);
  EXPECT_TRUE(r7.constant_discriminant);
  EXPECT_NEAR(r7.discriminant, 4.0, 1e-9);

  // A generic construction with c != 1 and a + b + c far from 0.
  const ClassicalReport r9 = detect_classical(
      construct(make_spec(9, {{"a", "1"}, {"b", "x"}, {"f", "1 + x^2"}}, {{"C12", 1.0}})).problem);
  EXPECT_FALSE(r9.sum_zero);
  EXPECT_FALSE(r9.lambda_mu);
  EXPECT_FALSE(r9.unit_c);
}

TEST(Fuzz, GeneratorIsDeterministic) {
  FuzzRng r1(42), r2(42);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(random_function(r1), random_function(r2));
  FuzzRng r3(7);
  const std::string text = random_function(r3);
  EXPECT_NO_THROW(expr::parse(text)) << text;
  FuzzRng a(5), b(5);
  const FuzzCase fa = fuzz_case(4, a);
  const FuzzCase fb = fuzz_case(4, b);
  EXPECT_EQ(describe(fa.spec), describe(fb.spec));
  EXPECT_EQ(fa.Cs, fb.Cs);
}

class FuzzProperty : public ::testing::TestWithParam<int> {};

TEST_P(FuzzProperty, HundredSpecsPass) {
  const int id = GetParam();
  FuzzRng rng(1000 + id);
  const Tolerances tol;
  for (int n = 0; n < 100; ++n) {
    const FuzzCase fc = fuzz_case(id, rng, FuzzOptions{}, tol);
    const CaseMetrics m = evaluate_case(fc.constructed, fc.Cs, tol);
    EXPECT_TRUE(m.passes(tol)) << describe(fc.spec) << "\n condition " << m.condition
                               << " particular " << m.particular << " family " << m.family
                               << " oracle " << m.oracle << " poles " << m.pole_mismatch
                               << " theorem " << m.theorem_vs_gs;
  }
}

INSTANTIATE_TEST_SUITE_P(AllCases, FuzzProperty, ::testing::Range(1, 11));
