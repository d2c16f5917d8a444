#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "riccati_lab/cli.hpp"

namespace fs = std::filesystem;
using riccati_lab::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "riccati-lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("riccati_lab_cli_" + std::string(
                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& sub = "") const { return (dir_ / sub).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ConstructTrivial) {
  const Result r = cli({"construct", "--case", "1", "--b", "0", "--c", "1", "--f", "0", "--C1", "0",
                        "--interval", "0", "0.9", "--Cs", "2", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir_ / "case.csv");
  ASSERT_EQ(rows[0].back(), "y[C=2]");
  ASSERT_EQ(rows.size(), 258u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i].back()), 1.0 / (2.0 - x), 1e-12);
  }
  const std::string report = slurp(dir_ / "report.txt");
  EXPECT_NE(report.find("condition_residual"), std::string::npos);
  EXPECT_NE(report.find("seed_relation_residual"), std::string::npos);
  EXPECT_NE(report.find("STATUS PASS"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "spec.json"));
}

TEST_F(Cli, ConstructGuardViolation) {
  const Result r = cli({"construct", "--case", "3", "--c", "1", "--a", "1", "--f", "1", "--C3", "0",
                        "--interval", "0", "1", "--out", out()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("ERROR GuardViolation ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("at x=0"), std::string::npos) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(Cli, ConstructCase7) {
  const Result r =
      cli({"construct", "--case", "7", "--b", "0", "--c", "1", "--f", "2", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir_ / "case.csv");
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    worst = std::max(worst, std::fabs(std::stod(rows[i][5]) - std::stod(rows[i][6])));
  EXPECT_LE(worst, 1e-9);
}

TEST_F(Cli, UsageAndSpecErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"construct", "--bogus"}).code, 1);
  const Result missing = cli({"construct", "--case", "1", "--b", "0", "--f", "0", "--out", out()});
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(missing.err.rfind("ERROR SpecError ", 0), 0u);
  const Result syntax =
      cli({"construct", "--case", "1", "--b", "0", "--c", "1+", "--f", "0", "--out", out()});
  EXPECT_EQ(syntax.code, 1);
  EXPECT_EQ(syntax.err.rfind("ERROR SyntaxError ", 0), 0u) << syntax.err;
}

TEST_F(Cli, VerifyTrivial) {
  const Result r = cli({"verify", "--case", "1", "--b", "0", "--c", "1", "--f", "0", "--C1", "0",
                        "--interval", "0", "0.9", "--Cs", "2", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir_ / "verify.csv");
  ASSERT_EQ(rows[0], (std::vector<std::string>{"C", "x", "closed_form", "rk_oracle", "abs_err",
                                               "rel_err"}));
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, std::stod(rows[i][5]));
  EXPECT_LE(worst, 1e-10);
  EXPECT_NE(r.out.find("POLES 0"), std::string::npos);
}

TEST_F(Cli, VerifyErfiCase) {
  const Result r = cli({"verify", "--case", "1", "--b", "0", "--c", "1", "--f", "4", "--C1", "0",
                        "--interval", "0", "0.4", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir_ / "verify.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i][5]), 1e-6);
}

TEST_F(Cli, VerifyReportsPole) {
  // y = 1/(C - x) with C = 0.5 blows up at x = 0.5.
  const Result r = cli({"verify", "--case", "1", "--b", "0", "--c", "1", "--f", "0", "--C1", "0",
                        "--interval", "0", "0.9", "--Cs", "0.5", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("POLES 1\n"), std::string::npos);
  EXPECT_NE(r.out.find("pole[C=0.5] x=0.49999"), std::string::npos) << r.out;
  for (const auto& row : read_csv(dir_ / "verify.csv")) {
    if (row[0] == "C") continue;
    EXPECT_GT(std::fabs(std::stod(row[1]) - 0.5), 1e-2);
  }
}

TEST_F(Cli, VerifyFromConstructOutput) {
  ASSERT_EQ(cli({"construct", "--case", "7", "--b", "0", "--c", "1", "--f", "2", "--Cs", "3",
                 "--out", out("c")})
                .code,
            0);
  const Result r = cli({"verify", "--spec", out("c/spec.json"), "--out", out("v")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("[C=3]"), std::string::npos);
}

TEST_F(Cli, ExitZeroNeverWithFailLine) {
  // A tolerance below round-off forces a failing check.
  const Result r = cli({"verify", "--case", "1", "--b", "x", "--c", "1", "--f", "1", "--C1", "0",
                        "--tol-res", "1e-30", "--out", out()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out.find("STATUS PASS"), std::string::npos);
  // Here construction passes exactly and only the oracle comparison fails.
  const Result v = cli({"verify", "--case", "1", "--b", "0", "--c", "1", "--f", "0", "--C1", "0",
                        "--tol-res", "1e-30", "--out", out()});
  EXPECT_EQ(v.code, 3);
  EXPECT_NE(v.out.find(" FAIL\n"), std::string::npos);
  EXPECT_NE(v.out.find("STATUS FAIL"), std::string::npos);
  EXPECT_EQ(v.err.rfind("ERROR ToleranceFailure ", 0), 0u);
  EXPECT_EQ(r.err.rfind("ERROR ", 0), 0u);
}

TEST_F(Cli, StarVacuum) {
  const Result r = cli({"star", "--eta", "0", "--delta", "0", "--A0", "1", "--R", "1", "--u", "0",
                        "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir_ / "profile.csv");
  ASSERT_EQ(rows.size(), 514u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::stod(rows[i][2]), 1.0);  // V
    EXPECT_EQ(std::stod(rows[i][3]), 1.0);  // A
    for (int col : {4, 5, 6, 7, 8}) EXPECT_EQ(std::stod(rows[i][col]), 0.0);
  }
  EXPECT_TRUE(fs::exists(dir_ / "physicality.txt"));
  const std::string plot = slurp(dir_ / "plot.gp");
  EXPECT_NE(plot.find("'profile.csv'"), std::string::npos);
}

TEST_F(Cli, StarConstantDensityFromCase7) {
  // With f = 0 the case 7 condition gives a = 0, which the mapping produces for delta = 0.
  const Result r = cli({"star", "--eta", "0.1", "--delta", "0", "--case", "7", "--f", "0", "--C",
                        "2", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir_ / "profile.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][5]), 0.6, 1e-8);
}

TEST_F(Cli, StarPlantedViolationStillExitsZero) {
  // eta = 1 - x, delta = -2 x eta' keeps a = 0; rho = 6 - 10 x turns negative at r = sqrt(0.6).
  const Result r = cli({"star", "--eta", "1 - x", "--delta", "2*x", "--case", "7", "--f", "0",
                        "--C", "0.5", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(dir_ / "physicality.txt");
  const auto at = text.find("(i) positivity: FAIL at r=");
  ASSERT_NE(at, std::string::npos) << text;
  const double r_star = std::stod(text.substr(at + 26));
  EXPECT_NEAR(r_star, std::sqrt(0.6), 1e-3);
}

TEST_F(Cli, StarMetricSignature) {
  const Result r = cli({"star", "--eta", "1", "--delta", "0", "--u", "0", "--out", out()});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.err.rfind("ERROR MetricSignatureViolation ", 0), 0u);
}

TEST_F(Cli, StarRejectsNonSolution) {
  const Result r = cli({"star", "--eta", "0.1*x", "--delta", "0", "--u", "0", "--out", out()});
  EXPECT_EQ(r.code, 3);
}

TEST_F(Cli, FuzzDeterministic) {
  const std::vector<std::string> args = {"fuzz", "--case", "all", "--n", "10", "--seed", "42"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", out("a")});
  b.insert(b.end(), {"--out", out("b")});
  ASSERT_EQ(cli(a).code, 0);
  ASSERT_EQ(cli(b).code, 0);
  const std::string fa = slurp(dir_ / "a/fuzz.csv");
  EXPECT_EQ(fa, slurp(dir_ / "b/fuzz.csv"));
  EXPECT_EQ(std::count(fa.begin(), fa.end(), '\n'), 101);
  EXPECT_EQ(fa.find('\r'), std::string::npos);
}

TEST_F(Cli, FuzzCase2) {
  const Result r = cli({"fuzz", "--case", "2", "--n", "100", "--seed", "7", "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("passed=100 failed=0"), std::string::npos);
}

TEST_F(Cli, FuzzEmpty) {
  const Result r = cli({"fuzz", "--n", "0", "--out", out()});
  ASSERT_EQ(r.code, 0);
  const std::string csv = slurp(dir_ / "fuzz.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_EQ(csv.rfind("case,index,digest,", 0), 0u);
}
