#include "riccati_lab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "riccati_lab/astro.hpp"
#include "riccati_lab/cases.hpp"
#include "riccati_lab/errors.hpp"

namespace riccati_lab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

/// Error raised when a report line fails its tolerance.
class ToleranceFailure : public Error {
 public:
  explicit ToleranceFailure(const std::string& what) : Error("ToleranceFailure", what) {}
};

int exit_code_for(const Error& e) {
  if (dynamic_cast<const MetricSignatureViolation*>(&e)) return kMetricSignature;
  if (dynamic_cast<const GuardViolation*>(&e) || dynamic_cast<const RadicandNegative*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const NonFiniteIntegrand*>(&e) ||
      dynamic_cast<const CoefficientEvaluationError*>(&e) ||
      dynamic_cast<const ParticularVanishes*>(&e) || dynamic_cast<const DegenerateQuadruple*>(&e) ||
      dynamic_cast<const OutOfDomain*>(&e))
    return kGuard;
  if (dynamic_cast<const ConditionResidualTooLarge*>(&e) ||
      dynamic_cast<const ToleranceNotMet*>(&e) || dynamic_cast<const ParticularNotASolution*>(&e) ||
      dynamic_cast<const NotASolution*>(&e) || dynamic_cast<const ToleranceFailure*>(&e))
    return kTolerance;
  return kUsage;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw SpecError("cannot write " + (dir / name).string());
  return f;
}

// ---------------------------------------------------------------------------
// Flags shared by the case-driven subcommands

struct SpecFlags {
  int id = 0;
  std::map<std::string, std::string> functions;  // a, b, c, f
  std::map<std::string, double> constants;
  std::string branch;
  std::vector<double> interval{0.0, 1.0};
  double x0 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> Cs{1.0};
};

struct ToleranceFlags {
  std::optional<double> quad, res, cond, guard;

  Tolerances resolve() const {
    Tolerances t = Tolerances::from_environment();
    if (quad) t.quad = *quad;
    if (res) t.res = *res;
    if (cond) t.cond = *cond;
    if (guard) t.pole_guard = *guard;
    return t;
  }
};

const char* kConstantNames[] = {"C1", "C3", "C5", "C7", "C12"};

void add_function_flags(CLI::App* app, std::map<std::string, std::string>& into,
                        std::vector<std::string> keys) {
  for (const std::string& k : keys)
    app->add_option_function<std::string>(
        "--" + k, [&into, k](const std::string& v) { into[k] = v; },
        "expression for " + k + "(x)");
}

void add_case_flags(CLI::App* app, SpecFlags& s, bool with_coefficients) {
  app->add_option("--case", s.id, "case number 1..10");
  add_function_flags(app, s.functions,
                     with_coefficients ? std::vector<std::string>{"a", "b", "c", "f"}
                                       : std::vector<std::string>{"f"});
  for (const char* name : kConstantNames) {
    const std::string n = name;
    app->add_option_function<double>(
        "--" + n, [&s, n](double v) { s.constants[n] = v; }, "constant " + n);
  }
  app->add_option("--branch", s.branch, "branch sign +1 or -1");
}

void add_tolerance_flags(CLI::App* app, ToleranceFlags& t) {
  app->add_option_function<double>("--tol-quad", [&t](double v) { t.quad = v; });
  app->add_option_function<double>("--tol-res", [&t](double v) { t.res = v; });
  app->add_option_function<double>("--tol-cond", [&t](double v) { t.cond = v; });
  app->add_option_function<double>("--pole-guard", [&t](double v) { t.guard = v; });
}

std::optional<int> parse_branch(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "+1" || text == "1" || text == "+") return 1;
  if (text == "-1" || text == "-") return -1;
  throw SpecError("branch must be +1 or -1, got '" + text + "'");
}

// Cases with a square-root branch default to +1.
std::optional<int> resolve_branch(int id, const std::string& text) {
  std::optional<int> branch = parse_branch(text);
  if (!branch && case_info(id).branch) branch = 1;
  return branch;
}

CaseSpec spec_from(const SpecFlags& s) {
  if (s.interval.size() != 2) throw SpecError("--interval takes two numbers");
  return make_spec(s.id, s.functions, s.constants, resolve_branch(s.id, s.branch),
                   {s.interval[0], s.interval[1]}, s.x0);
}

json spec_json(const SpecFlags& s) {
  json j;
  j["case"] = s.id;
  j["functions"] = s.functions;
  j["constants"] = s.constants;
  if (!s.branch.empty()) j["branch"] = *parse_branch(s.branch);
  j["interval"] = s.interval;
  if (!std::isnan(s.x0)) j["x0"] = s.x0;
  j["Cs"] = s.Cs;
  return j;
}

SpecFlags spec_flags_from_json(const json& j) {
  SpecFlags s;
  s.id = j.at("case").get<int>();
  s.functions = j.at("functions").get<std::map<std::string, std::string>>();
  if (j.contains("constants")) s.constants = j.at("constants").get<std::map<std::string, double>>();
  if (j.contains("branch")) s.branch = j.at("branch").get<int>() > 0 ? "+1" : "-1";
  if (j.contains("interval")) s.interval = j.at("interval").get<std::vector<double>>();
  if (j.contains("x0")) s.x0 = j.at("x0").get<double>();
  if (j.contains("Cs")) s.Cs = j.at("Cs").get<std::vector<double>>();
  return s;
}

// Collects "name value <= tol ok|FAIL" lines; any FAIL makes the run fail.
class Report {
 public:
  void info(const std::string& line) { text_ += line + "\n"; }
  void check(const std::string& name, double value, double tol) {
    const bool ok = value <= tol;
    text_ += name + " " + num(value) + " <= " + short_num(tol) + (ok ? " ok" : " FAIL") + "\n";
    if (!ok && first_failure_.empty()) first_failure_ = name + "=" + num(value);
  }
  std::string finish() {
    text_ += std::string("STATUS ") + (first_failure_.empty() ? "PASS" : "FAIL") + "\n";
    return text_;
  }
  const std::string& first_failure() const { return first_failure_; }

 private:
  std::string text_;
  std::string first_failure_;
};

// ---------------------------------------------------------------------------
// construct

int cmd_construct(const SpecFlags& flags, const Tolerances& tol, const fs::path& out_dir,
                  std::ostream& out) {
  const CaseSpec spec = spec_from(flags);
  ConstructOptions opts;
  opts.tol = tol;
  const ConstructedCase cc = construct(spec, opts);
  const ConditionSides sides = condition_sides(cc);

  {
    std::ofstream csv = open_output(out_dir, "case.csv");
    csv << "x,a,b,c,y_p,condition_lhs,condition_rhs";
    for (double C : flags.Cs) csv << ",y[C=" << num(C) << "]";
    csv << "\n";
    for (std::size_t i = 0; i < sides.x.size(); ++i) {
      const double x = sides.x[i];
      csv << num(x) << ',' << num(cc.problem.a()(x)) << ',' << num(cc.problem.b()(x)) << ','
          << num(cc.problem.c()(x)) << ',' << num(cc.y_p(x)) << ',' << num(sides.lhs[i]) << ','
          << num(sides.rhs[i]);
      for (double C : flags.Cs) csv << ',' << num(cc.general(C, x));
      csv << "\n";
    }
  }

  Report rep;
  rep.info("spec " + describe(spec));
  rep.info("family_constant " + case_info(spec.id).theorem_constant);
  rep.check("condition_residual", cc.condition_residual, tol.cond);
  rep.check("particular_residual", cc.particular_residual, tol.res);
  try {
    rep.info("seed_relation_residual " + num(seed_relation_check(cc)));
  } catch (const RadicandNegative& e) {
    rep.info("seed_relation_residual n/a radicand negative at x=" + num(e.x()));
  }
  for (double C : flags.Cs) {
    rep.check("theorem_vs_gs[C=" + num(C) + "]", family_agreement(cc.general, cc.theorem, C, tol),
              1e-8);
    std::string line = "poles[C=" + num(C) + "]";
    const auto poles = cc.general.poles(C);
    if (poles.empty()) line += " none";
    for (double xp : poles) line += " " + num(xp);
    rep.info(line);
  }
  const std::string text = rep.finish();
  open_output(out_dir, "report.txt") << text;
  open_output(out_dir, "spec.json") << spec_json(flags).dump(2) << "\n";
  out << text;
  if (!rep.first_failure().empty()) throw ToleranceFailure(rep.first_failure());
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const SpecFlags& flags, const Tolerances& tol, const fs::path& out_dir,
               std::ostream& out) {
  const CaseSpec spec = spec_from(flags);
  ConstructOptions opts;
  opts.tol = tol;
  const ConstructedCase cc = construct(spec, opts);
  const Interval I = spec.interval;

  Report rep;
  rep.info("spec " + describe(spec));
  std::ofstream csv = open_output(out_dir, "verify.csv");
  csv << "C,x,closed_form,rk_oracle,abs_err,rel_err\n";
  IntegratorSettings oracle;
  oracle.rtol = 1e-12;
  oracle.atol = 1e-15;
  std::size_t pole_count = 0;
  const double h = I.width() / 1024.0;
  for (double C : flags.Cs) {
    const std::string tag = "[C=" + num(C) + "]";
    const OracleComparison cmp =
        compare_with_oracle(cc.problem, cc.general, I.lo, cc.general(C, I.lo), tol, oracle);
    for (const auto& row : cmp.rows) {
      const double abs_err = std::fabs(row.closed_form - row.oracle);
      csv << num(C) << ',' << num(row.x) << ',' << num(row.closed_form) << ',' << num(row.oracle)
          << ',' << num(abs_err) << ',' << num(abs_err / (1.0 + std::fabs(row.oracle))) << "\n";
    }
    rep.check("oracle_sup_rel_err" + tag, cmp.sup_rel_err, tol.res);
    rep.check("family_residual" + tag, family_residual(cc.problem, cc.general, C, tol).value,
              tol.res);
    for (double xp : cmp.closed_form_poles) {
      const double cell = I.lo + std::floor((xp - I.lo) / h) * h;
      rep.info("pole" + tag + " x=" + num(xp) + " bracket " + num(cell) + " " +
               num(std::min(I.hi, cell + h)));
    }
    pole_count += cmp.closed_form_poles.size();
    if (cmp.oracle_pole) {
      rep.info("oracle_pole" + tag + " x=" + num(*cmp.oracle_pole));
      rep.check("pole_mismatch" + tag, cmp.pole_mismatch, 1e-3);
    }
  }
  rep.info("POLES " + std::to_string(pole_count));

  // Cross-ratio of four members whose constants lie beyond the range of Q.
  double qmax = 0.0;
  for (double x : linspace(I.lo, I.hi, 257))
    qmax = std::max(qmax, std::fabs(cc.general.quadrature()(x)));
  const double base = qmax + 1.0;
  const auto& g = cc.general;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : linspace(I.lo, I.hi, 16)) {
    const double r = cross_ratio(g.member(base), g.member(base + 1.5), g.member(-base - 0.5),
                                 g.member(-base - 3.0), x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  rep.check("cross_ratio_variation", (hi - lo) / (1.0 + std::fabs(hi)), 1e-8);

  const std::string text = rep.finish();
  open_output(out_dir, "verify.txt") << text;
  out << text;
  if (!rep.first_failure().empty()) throw ToleranceFailure(rep.first_failure());
  return kOk;
}

// ---------------------------------------------------------------------------
// star

struct StarFlags {
  std::string eta = "0", delta = "0", u;
  double A0 = 1.0, R = 1.0, C = 1.0;
  SpecFlags spec;
};

int cmd_star(const StarFlags& flags, const Tolerances& tol, const fs::path& out_dir,
             std::ostream& out) {
  const StellarModel model = make_model(flags.eta, flags.delta, flags.A0, flags.R);
  const RiccatiProblem mapped = riccati_from_physics(model);
  ScalarFunction u;
  std::string source;
  if (!flags.u.empty()) {
    if (flags.spec.id != 0) throw SpecError("give either --u or --case, not both");
    u = ScalarFunction::from_expr(expr::parse(flags.u), Interval::all(), "u");
    source = "u=" + flags.u;
  } else {
    if (flags.spec.id == 0) throw SpecError("star needs --u or --case");
    // Free coefficients come from the mapping; the case supplies the rest.
    const CaseInfo& info = case_info(flags.spec.id);
    CaseSpec spec = make_spec(flags.spec.id, flags.spec.functions, flags.spec.constants,
                              resolve_branch(flags.spec.id, flags.spec.branch), model.domain());
    for (Coefficient k : info.free) {
      switch (k) {
        case Coefficient::A: spec.a = mapped.a(); break;
        case Coefficient::B: spec.b = mapped.b(); break;
        case Coefficient::C: spec.c = mapped.c(); break;
      }
    }
    ConstructOptions opts;
    opts.tol = tol;
    const ConstructedCase cc = construct(spec, opts);
    u = cc.general.member(flags.C);
    source = describe(spec) + " C=" + num(flags.C);
  }
  const StellarProfile prof = profile(model, u, tol);
  const PhysicalityReport report = physicality_report(prof);

  {
    std::ofstream csv = open_output(out_dir, "profile.csv");
    write_profile_csv(csv, prof);
  }
  std::string text = "model eta=" + flags.eta + " delta=" + flags.delta + " A0=" + num(flags.A0) +
                     " R=" + num(flags.R) + "\n";
  text += "solution " + source + "\n";
  text += "mass_eta_error " + num(prof.mass_eta_error) + "\n";
  text += format_report(report);
  open_output(out_dir, "physicality.txt") << text;
  open_output(out_dir, "plot.gp")
      << "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set xlabel 'r'\n"
         "set ylabel 'density, pressure'\n"
         "plot 'profile.csv' using 1:6 with lines, \\\n"
         "     '' using 1:7 with lines, \\\n"
         "     '' using 1:8 with lines\n";
  out << text;
  return kOk;
}

// ---------------------------------------------------------------------------
// fuzz

std::string digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct FuzzFlags {
  std::string which = "all";
  int n = 100;
  std::uint64_t seed = 1;
};

int cmd_fuzz(const FuzzFlags& flags, const Tolerances& tol, const fs::path& out_dir,
             std::ostream& out) {
  std::vector<int> ids;
  if (flags.which == "all") {
    for (int id = 1; id <= 10; ++id) ids.push_back(id);
  } else {
    int id = 0;
    try {
      id = std::stoi(flags.which);
    } catch (const std::exception&) {
      throw SpecError("--case must be 'all' or 1..10");
    }
    case_info(id);
    ids.push_back(id);
  }
  if (flags.n < 0) throw SpecError("--n must be non-negative");

  std::ofstream csv = open_output(out_dir, "fuzz.csv");
  csv << "case,index,digest,attempts,condition,seed_relation,particular,family,oracle,"
         "pole_mismatch,theorem_vs_gs,poles,pass\n";
  int passed = 0, failed = 0;
  for (int id : ids) {
    FuzzRng rng(flags.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(id));
    for (int i = 0; i < flags.n; ++i) {
      const FuzzCase fc = fuzz_case(id, rng, FuzzOptions{}, tol);
      const CaseMetrics m = evaluate_case(fc.constructed, fc.Cs, tol);
      const bool ok = m.passes(tol);
      (ok ? passed : failed)++;
      csv << id << ',' << i << ',' << digest(describe(fc.spec)) << ',' << fc.attempts << ','
          << num(m.condition) << ',' << num(m.seed) << ',' << num(m.particular) << ','
          << num(m.family) << ',' << num(m.oracle) << ',' << num(m.pole_mismatch) << ','
          << num(m.theorem_vs_gs) << ',' << m.poles << ',' << (ok ? "pass" : "fail") << "\n";
    }
  }
  out << "FUZZ specs=" << passed + failed << " passed=" << passed << " failed=" << failed << "\n";
  if (failed > 0) throw ToleranceFailure(std::to_string(failed) + " fuzzed specs failed");
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-form Riccati constructions, verification and stellar profiles",
               "riccati-lab"};
  app.require_subcommand(1);
  std::string out_dir = ".";
  ToleranceFlags tflags;

  SpecFlags cflags;
  std::string spec_file;
  auto* construct_cmd = app.add_subcommand("construct", "build a case and its closed-form family");
  auto* verify_cmd = app.add_subcommand("verify", "check a construction against the RK oracle");
  for (auto* sub : {construct_cmd, verify_cmd}) {
    add_case_flags(sub, cflags, true);
    sub->add_option("--interval", cflags.interval, "lo hi")->expected(2);
    sub->add_option("--x0", cflags.x0, "base point of the integrals");
    sub->add_option("--Cs", cflags.Cs, "family constants to evaluate")->expected(1, 1000);
    sub->add_option("--out", out_dir, "output directory");
    add_tolerance_flags(sub, tflags);
  }
  verify_cmd->add_option("--spec", spec_file, "spec.json written by construct");

  StarFlags sflags;
  auto* star_cmd = app.add_subcommand("star", "anisotropic star profile and physicality report");
  star_cmd->add_option("--eta", sflags.eta, "eta(x) = m/r^3");
  star_cmd->add_option("--delta", sflags.delta, "anisotropy p_perp - p_r");
  star_cmd->add_option("--A0", sflags.A0, "metric normalization");
  star_cmd->add_option("--R", sflags.R, "boundary radius");
  star_cmd->add_option("--u", sflags.u, "explicit solution u(x) = A'/A");
  star_cmd->add_option("--C", sflags.C, "family constant of the case solution");
  add_case_flags(star_cmd, sflags.spec, false);
  star_cmd->add_option("--out", out_dir, "output directory");
  add_tolerance_flags(star_cmd, tflags);

  FuzzFlags fflags;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "random specs through the full check suite");
  fuzz_cmd->add_option("--case", fflags.which, "'all' or 1..10");
  fuzz_cmd->add_option("--n", fflags.n, "specs per case");
  fuzz_cmd->add_option("--seed", fflags.seed, "generator seed");
  fuzz_cmd->add_option("--out", out_dir, "output directory");
  add_tolerance_flags(fuzz_cmd, tflags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "ERROR Usage " << one_line(e.what()) << "\n";
    return kUsage;
  }

  try {
    const Tolerances tol = tflags.resolve();
    if (*construct_cmd) return cmd_construct(cflags, tol, out_dir, out);
    if (*verify_cmd) {
      if (!spec_file.empty()) {
        std::ifstream in(spec_file);
        if (!in) throw SpecError("cannot read " + spec_file);
        json j;
        try {
          j = json::parse(in);
        } catch (const json::exception& e) {
          throw SpecError(std::string("bad spec file: ") + e.what());
        }
        SpecFlags from_file = spec_flags_from_json(j);
        if (verify_cmd->count("--Cs")) from_file.Cs = cflags.Cs;
        return cmd_verify(from_file, tol, out_dir, out);
      }
      return cmd_verify(cflags, tol, out_dir, out);
    }
    if (*star_cmd) return cmd_star(sflags, tol, out_dir, out);
    if (*fuzz_cmd) return cmd_fuzz(fflags, tol, out_dir, out);
  } catch (const Error& e) {
    err << "ERROR " << e.code() << " " << one_line(e.what()) << "\n";
    return exit_code_for(e);
  } catch (const json::exception& e) {
    err << "ERROR SpecError " << one_line(e.what()) << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "ERROR IOError " << one_line(e.what()) << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace riccati_lab::cli
