#include "curvscan/warped.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "curvscan/corpus.hpp"
#include "doctest.h"

using namespace curvscan;

namespace {

MetricChart chart_from(const std::string& text) { return MetricChart::from_string(text); }

WarpedSpec line_base_spec(const std::string& fiber_text, const std::string& warp) {
  return WarpedSpec(chart_from("dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n"),
                    chart_from(fiber_text), warp);
}

const char* kFiber2 =
    "dim 2\ncoords v1 v2\ndomain v1 0.3 1.3\ndomain v2 0.3 1.3\n"
    "g 1 1 : 1\ng 2 2 : v1^2 + 2\n";

WarpedSpec synthetic_p2() {
  return WarpedSpec(chart_from("dim 2\ncoords u1 u2\ndomain u1 0.3 1.3\n"
                               "domain u2 0.3 1.3\ng 1 1 : 1\ng 2 2 : u1^2 + 1\n"),
                    chart_from(kFiber2), "2 + u1^2 + 0.5*u2^2");
}

WarpedSpec lorentzian_p1() {
  return WarpedSpec(
      chart_from("dim 1\ncoords t\ndomain t 0.2 1.2\ng 1 1 : -1\n"),
      chart_from("dim 3\ncoords v1 v2 v3\ndomain v1 0.3 1.3\ndomain v2 0.3 1.3\n"
                 "domain v3 0.3 1.3\ng 1 1 : 1\ng 2 2 : v1^2 + 2\ng 3 3 : exp(v2)\n"),
      "exp(0.3*t) + 1");
}

ClassifyConfig cfg(int points = 6) {
  ClassifyConfig c;
  c.points = points;
  return c;
}

const PaperCase& corpus(const std::string& name) { return find_case(name); }

}  // namespace

TEST_CASE("assemble block structure") {
  // 1x1 base and fiber, f = x1^2 -> diag(1, x1^2)
  WarpedSpec s(chart_from("dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n"),
               chart_from("dim 1\ncoords y\ndomain y 0 1\ng 1 1 : 1\n"), "x1^2");
  MetricChart g = s.assemble();
  CHECK(g.dim() == 2);
  CurvatureEngine eng(g);
  Matrix gm;
  std::vector<Matrix> dg;
  std::vector<std::vector<Matrix>> d2g;
  eng.metric_at(PointSample{{1.2, 0.5}}, gm, dg, d2g);
  CHECK(gm(0, 0) == 1.0);
  CHECK(gm(1, 1) == doctest::Approx(1.44));
  CHECK(gm(0, 1) == 0.0);

  // coordinate collision is rejected
  CHECK_THROWS_AS(
      WarpedSpec(chart_from("dim 1\ncoords x1\ndomain x1 0 1\ng 1 1 : 1\n"),
                 chart_from("dim 1\ncoords x1\ndomain x1 0 1\ng 1 1 : 1\n"), "1"),
      ChartError);
  // conflicting shared parameter values are rejected
  CHECK_THROWS_AS(
      WarpedSpec(
          chart_from("dim 1\ncoords x1\nparam c1 = 1\ndomain x1 0 1\ng 1 1 : 1\n"),
          chart_from("dim 1\ncoords y\nparam c1 = 2\ndomain y 0 1\ng 1 1 : 1\n"), "1"),
      ChartError);
}

TEST_CASE("assembled warped chart reproduces the mixed Christoffel block") {
  // Gamma^alpha_{a beta} = f_a/(2f) delta^alpha_beta on the assembled chart
  const PaperCase& pc = corpus("M-general");
  CurvatureEngine eng(pc.chart);
  PointSample pt{{1.0, 0.5, 0.7, 0.9, 1.1}};
  CurvatureSample s = eng.sample(pt);
  const double f = 1.0 + 2.0;  // x1^2 + 2 at x1 = 1
  const double fp = 2.0;
  for (int al = 1; al < 5; ++al)
    for (int be = 1; be < 5; ++be) {
      const double want = (al == be) ? fp / (2 * f) : 0.0;
      CHECK(s.gamma[al](0, be) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("warp scalars desk example") {
  // f = x1^2 over a line base with a 2-dimensional fiber: at x1 = 1,
  // f_1 = 2, P = 1, T = 0, Q = f (q-1) P = 1
  WarpedSpec s(chart_from("dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n"),
               chart_from(kFiber2), "x1^2");
  WarpedAnalyzer an(s);
  WarpScalars ws = an.warp_scalars(PointSample{{1.0}});
  CHECK(ws.f == doctest::Approx(1.0));
  CHECK(ws.df[0] == doctest::Approx(2.0));
  CHECK(ws.P == doctest::Approx(1.0));
  CHECK(ws.T(0, 0) == doctest::Approx(0.0));
  CHECK(ws.tr_T == doctest::Approx(0.0));
  CHECK(ws.Q == doctest::Approx(1.0));
}

TEST_CASE("product case: T = P = Q = 0 and exact block identities") {
  WarpedSpec s(chart_from("dim 2\ncoords u1 u2\ndomain u1 0.3 1.3\ndomain u2 0.3 1.3\n"
                          "g 1 1 : 1\ng 2 2 : u1^2 + 1\n"),
               chart_from(kFiber2), "1");
  WarpedAnalyzer an(s);
  AssemblyReport rep = an.verify_assembly(cfg(), /*with_classification=*/false);
  CHECK(rep.max_abs_T == 0.0);
  CHECK(rep.max_abs_P == 0.0);
  CHECK(rep.max_abs_Q == 0.0);
  CHECK(rep.worst_deviation() < 1e-12);
}

TEST_CASE("step II warp satisfies its defining equation") {
  // -2 (f')^2 + f (2 f'' - 1) = 0
  std::vector<std::string> coords = {"x1"};
  std::vector<std::string> params = {"c1", "c2"};
  for (const char* text :
       {"exp(-sqrt(c1)*(x1 + c2))*(exp(sqrt(c1)*(x1 + c2)) + 4*c1)^2/(16*c1^2)",
        "exp(-sqrt(c1)*(x1 + c2))*(1 + 4*c1*exp(sqrt(c1)*(x1 + c2)))^2/(16*c1^2)"}) {
    Expr f = parse_expr(text, coords, params);
    Expr fp = differentiate(f, "x1");
    Expr fpp = differentiate(fp, "x1");
    Expr resid = Expr::number(-2) * fp * fp + f * (Expr::number(2) * fpp - Expr::number(1));
    for (double x : {0.5, 0.8, 1.1, 1.5}) {
      Env env{{"x1", x}, {"c1", 1.0}, {"c2", 1.0}};
      CHECK(std::abs(evaluate(resid, env)) < 1e-10 * std::abs(evaluate(f, env)));
    }
  }
}

TEST_CASE("oracle equivalence: every warped corpus spec") {
  for (const auto& pc : builtin_cases()) {
    if (!pc.spec) continue;
    WarpedAnalyzer an(*pc.spec);
    AssemblyReport rep = an.verify_assembly(cfg(), false);
    INFO(pc.name, " worst deviation ", rep.worst_deviation());
    CHECK(rep.worst_deviation() < 1e-8);
  }
}

TEST_CASE("oracle equivalence: synthetic two-dimensional base") {
  WarpedAnalyzer an(synthetic_p2());
  AssemblyReport rep = an.verify_assembly(cfg(), false);
  CHECK(rep.worst_deviation() < 1e-8);
}

TEST_CASE("oracle equivalence: Lorentzian line base") {
  WarpedAnalyzer an(lorentzian_p1());
  AssemblyReport rep = an.verify_assembly(cfg(), false);
  CHECK(rep.worst_deviation() < 1e-8);
}

TEST_CASE("a corrupted prediction is flagged") {
  WarpedAnalyzer an(*corpus("M-general").spec);
  CurvatureEngine eng(an.assembled());
  CurvatureSample s = draw_samples(eng, 1, 11).front();
  BlockTensor4 pred = an.predicted_riemann(s.point);
  pred.fiber *= 1.001;  // deliberate corruption
  auto devs = an.compare_at(s, pred, an.predicted_ricci_scalar(s.point),
                            an.predicted_wedges(s.point));
  CHECK(devs[0].first == "R");
  CHECK(devs[0].second > 1e-5);
}

TEST_CASE("blockwise six-term check wherever the six-term condition holds") {
  for (const char* name : {"M-step-I", "M-step-II", "M-step-III", "M-special"}) {
    const PaperCase& pc = corpus(name);
    WarpedAnalyzer an(*pc.spec);
    ClassificationReport rep = classify(pc.chart, cfg());
    REQUIRE(rep.grt == Flag::Pass);
    for (const auto& pv : rep.per_point) {
      BlockResiduals r = an.check_grt_blocks(pv.grt.coeffs, pv.point);
      INFO(name, " worst block residual ", r.worst());
      CHECK(r.worst() < 1e-7);
    }
  }
}

TEST_CASE("blockwise six-term check fails on the generic metric") {
  const PaperCase& pc = corpus("M-general");
  WarpedAnalyzer an(*pc.spec);
  ClassificationReport rep = classify(pc.chart, cfg());
  REQUIRE(rep.grt == Flag::Fail);
  for (const auto& pv : rep.per_point) {
    BlockResiduals r = an.check_grt_blocks(pv.grt.coeffs, pv.point);
    CHECK(r.fiber >= 1e-4);
  }
}

TEST_CASE("zero coefficients solve the flat product blockwise") {
  WarpedSpec s(chart_from("dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n"),
               chart_from("dim 2\ncoords v1 v2\ndomain v1 0.3 1.3\ndomain v2 0.3 1.3\n"
                          "g 1 1 : 1\ng 2 2 : 1\n"),
               "1");
  WarpedAnalyzer an(s);
  BlockResiduals r = an.check_grt_blocks(Vector::Zero(6), PointSample{{1.0, 0.5, 0.5}});
  CHECK(r.worst() == 0.0);
}

TEST_CASE("three-term blockwise check on Step II") {
  const PaperCase& pc = corpus("M-step-II");
  WarpedAnalyzer an(*pc.spec);
  ClassificationReport rep = classify(pc.chart, cfg());
  REQUIRE(rep.roter == Flag::Pass);
  for (const auto& pv : rep.per_point) {
    BlockResiduals r = an.check_rt_blocks(pv.roter.coeffs, pv.point);
    CHECK(r.worst() < 1e-7);
  }
  // Step I admits no three-term solution
  const PaperCase& p1 = corpus("M-step-I");
  WarpedAnalyzer an1(*p1.spec);
  ClassificationReport rep1 = classify(p1.chart, cfg());
  bool some_large = false;
  for (const auto& pv : rep1.per_point)
    some_large |= an1.check_rt_blocks(pv.roter.coeffs, pv.point).worst() > 1e-4;
  CHECK(some_large);
}

TEST_CASE("constant-curvature coefficients solve the blocks") {
  const PaperCase& pc = corpus("M-step-III");
  WarpedAnalyzer an(*pc.spec);
  CurvatureEngine eng(pc.chart);
  CurvatureSample s = draw_samples(eng, 1, 3).front();
  const int n = 5;
  Vector N(3);
  N << s.kappa / (2.0 * n * (n - 1)), 0.0, 0.0;
  BlockResiduals r = an.check_rt_blocks(N, s.point);
  CHECK(r.worst() < 1e-8);
}

TEST_CASE("conformal-flatness block identities") {
  // Step III (constant curvature) passes, Step I fails, flat product passes
  {
    const PaperCase& pc = corpus("M-step-III");
    WarpedAnalyzer an(*pc.spec);
    CurvatureEngine eng(pc.chart);
    for (const auto& s : draw_samples(eng, 3, 5))
      CHECK(an.check_cflat_warp(s.point).worst() < 1e-8);
  }
  {
    const PaperCase& pc = corpus("M-step-I");
    WarpedAnalyzer an(*pc.spec);
    CurvatureEngine eng(pc.chart);
    CurvatureSample s = draw_samples(eng, 1, 5).front();
    CHECK(an.check_cflat_warp(s.point).worst() > 1e-4);
  }
  {
    WarpedSpec s(chart_from("dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n"),
                 chart_from("dim 2\ncoords v1 v2\ndomain v1 0.3 1.3\n"
                            "domain v2 0.3 1.3\ng 1 1 : 1\ng 2 2 : 1\n"),
                 "1");
    WarpedAnalyzer an(s);
    CHECK(an.check_cflat_warp(PointSample{{1.0, 0.5, 0.5}}).worst() < 1e-12);
  }
}

TEST_CASE("corollary scalars agree with direct fiber classification") {
  Tolerances tol;
  // Step I: J1 != 0 predicts a Roter-type fiber; direct classification
  // of the fiber agrees, and the conformal-flatness predicate stays off
  {
    const PaperCase& pc = corpus("M-step-I");
    WarpedAnalyzer an(*pc.spec);
    ClassificationReport rep = classify(pc.chart, cfg());
    const auto& pv = rep.per_point.front();
    CorollaryScalars cs = an.corollary_scalars(pv.point, pv.grt.coeffs, tol);
    CHECK(cs.fiber_roter);
    CHECK_FALSE(cs.fiber_constant_curvature);
    CHECK_FALSE(cs.fiber_conformally_flat);
    ClassificationReport fiber = classify(pc.spec->fiber, cfg());
    CHECK(fiber.roter == Flag::Pass);
    CHECK(fiber.conformally_flat == Flag::Fail);
  }
  // Step III with the three-term coefficients embedded: J1 = 0, J2 != 0
  // predicts a constant-curvature fiber
  {
    const PaperCase& pc = corpus("M-step-III");
    WarpedAnalyzer an(*pc.spec);
    ClassificationReport rep = classify(pc.chart, cfg());
    const auto& pv = rep.per_point.front();
    Vector L = Vector::Zero(6);
    for (int i = 0; i < 3; ++i) L[i] = pv.roter.coeffs[i];
    CorollaryScalars cs = an.corollary_scalars(pv.point, L, tol);
    CHECK(cs.fiber_constant_curvature);
    ClassificationReport fiber = classify(pc.spec->fiber, cfg());
    CHECK(fiber.constant_curvature == Flag::Pass);
  }
}

TEST_CASE("printed-table cross-check flags the known mismatches") {
  const PaperCase& pc = corpus("M-step-I");
  WarpedAnalyzer an(*pc.spec);
  ClassificationReport rep = classify(pc.chart, cfg());
  const auto& pv = rep.per_point.front();
  auto warnings = an.table_cross_check(pv.grt.coeffs, pv.point);
  CHECK(!warnings.empty());
  bool giii = false;
  for (const auto& w : warnings)
    giii |= w.find("(iii) entry (g~, g~)") != std::string::npos;
  CHECK(giii);
}

TEST_CASE("Sbar.T symmetrization for higher-dimensional bases") {
  // 3-dimensional non-Einstein base with a warp mixing the coordinates:
  // the operator product Sbar . T need not be symmetric
  WarpedSpec s(
      chart_from("dim 3\ncoords u1 u2 u3\ndomain u1 0.3 1.3\ndomain u2 0.3 1.3\n"
                 "domain u3 0.3 1.3\n"
                 "g 1 1 : 1\ng 2 2 : u1^2 + 1\ng 3 3 : exp(u1 + u2)\n"),
      chart_from("dim 2\ncoords v1 v2\ndomain v1 0.3 1.3\ndomain v2 0.3 1.3\n"
                 "g 1 1 : 1\ng 2 2 : v1^2 + 2\n"),
      "2 + u1^2 + u2*u3");
  WarpedAnalyzer an(s);
  WarpScalars ws = an.warp_scalars(PointSample{{0.7, 0.9, 1.1}});
  CHECK(ws.s_dot_t_asym > 1e-6);
  CHECK((ws.S_dot_T - ws.S_dot_T.transpose()).cwiseAbs().maxCoeff() == 0.0);
  AssemblyReport rep = an.verify_assembly(cfg(4), false);
  bool warned = false;
  for (const auto& w : rep.warnings) warned |= w.find("Sbar.T") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("warp positivity is enforced") {
  WarpedSpec s(chart_from("dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n"),
               chart_from(kFiber2), "x1 - 1");
  WarpedAnalyzer an(s);
  CHECK_THROWS_AS(an.validate_warp(10, 42), ChartError);
}

TEST_CASE("warp spec file round-trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "curvscan_spec_test";
  fs::create_directories(dir);
  MetricChart base = chart_from("dim 1\ncoords x1\ndomain x1 0.5 1.5\ng 1 1 : 1\n");
  base.save((dir / "base.metric").string());
  chart_from(kFiber2).save((dir / "fiber.metric").string());
  {
    std::ofstream out(dir / "w.spec");
    out << "base base.metric\nfiber fiber.metric\nwarp : x1^2 + 2\n";
  }
  WarpedSpec s = WarpedSpec::load((dir / "w.spec").string());
  CHECK(s.p() == 1);
  CHECK(s.q() == 2);
  CHECK(s.warp_text == "x1^2 + 2");
  CHECK_THROWS_AS(WarpedSpec::load((dir / "nope.spec").string()), ChartError);
}
