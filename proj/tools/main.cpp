#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "curvscan/report.hpp"

namespace {

using namespace curvscan;

// exit codes: 0 success, 2 input error, 3 sampling/numeric failure,
// 4 expected-verdict mismatch (verify-paper only)
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitClaims = 4;

struct CommonOpts {
  int points = 25;
  std::uint64_t seed = 42;
  double abs_tol = 1e-12;
  double rel_tol = 1e-8;
  std::string json_path;

  ClassifyConfig config(const std::string& label) const {
    ClassifyConfig c;
    c.points = points;
    c.seed = seed;
    c.tol.abs_tol = abs_tol;
    c.tol.rel_tol = rel_tol;
    c.input_label = label;
    return c;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--points", o.points, "sample points per chart")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "PRNG seed");
  cmd->add_option("--abs-tol", o.abs_tol, "absolute zero tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--rel-tol", o.rel_tol, "relative zero tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--json", o.json_path, "write the JSON report to this path");
}

void write_json(const std::string& path, const ojson& j) {
  std::ofstream out(path);
  if (!out) throw ChartError("cannot write JSON report: " + path);
  out << dump_stable(j);
}

void print_flags(const ClassificationReport& rep) {
  auto row = [](const char* name, const std::string& value) {
    std::printf("  %-20s %s\n", name, value.c_str());
  };
  row("flat", flag_name(rep.flat));
  row("constant_curvature", flag_name(rep.constant_curvature));
  row("conformally_flat", flag_name(rep.conformally_flat));
  row("roter", flag_name(rep.roter));
  row("grt", flag_name(rep.grt));
  row("ein_level", rep.ein_level > 0 ? std::to_string(rep.ein_level) : "none");
}

void print_coeff_ranges(const ClassificationReport& rep) {
  auto ranges = [&](const char* label, const char* prefix, int count, auto getter) {
    std::printf("  %s coefficients (min..max over points):\n", label);
    for (int i = 0; i < count; ++i) {
      double lo = 0, hi = 0;
      bool first = true;
      for (const auto& pv : rep.per_point) {
        const double v = getter(pv)[i];
        if (first) {
          lo = hi = v;
          first = false;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      std::printf("    %s%d  [%.6g, %.6g]\n", prefix, i + 1, lo, hi);
    }
  };
  if (rep.roter == Flag::Pass)
    ranges("Roter", "N", 3,
           [](const PointVerdicts& pv) -> const Vector& { return pv.roter.coeffs; });
  if (rep.grt == Flag::Pass)
    ranges("generalized Roter", "L", 6,
           [](const PointVerdicts& pv) -> const Vector& { return pv.grt.coeffs; });
}

void print_classification(const ClassificationReport& rep) {
  std::printf("input: %s  (dim %d)\n", rep.input.c_str(), rep.n);
  std::printf("points %d  seed %llu  abs_tol %g  rel_tol %g\n", rep.config.points,
              static_cast<unsigned long long>(rep.config.seed), rep.config.tol.abs_tol,
              rep.config.tol.rel_tol);
  print_flags(rep);
  if (rep.n >= 3) print_coeff_ranges(rep);
  if (!rep.special_vanishing.empty()) {
    std::printf("  special vanishing:");
    for (const auto& s : rep.special_vanishing) std::printf(" %s", s.c_str());
    std::printf("\n");
  }
  for (const auto& w : rep.warnings) std::printf("  warning: %s\n", w.c_str());
}

int cmd_analyze(const std::string& file, const CommonOpts& opts) {
  MetricChart chart = MetricChart::load(file);
  ClassificationReport rep = classify(chart, opts.config(file));
  if (!opts.json_path.empty()) write_json(opts.json_path, to_json(rep));
  print_classification(rep);
  return kExitOk;
}

int cmd_warp(const std::string& file, const CommonOpts& opts, bool verify,
             const std::string& out_path) {
  WarpedSpec spec = WarpedSpec::load(file);
  WarpedAnalyzer analyzer(spec);
  analyzer.validate_warp(opts.points, opts.seed);

  if (!out_path.empty()) {
    analyzer.assembled().save(out_path);
    std::printf("assembled chart written to %s\n", out_path.c_str());
  }
  if (!verify) {
    if (out_path.empty())
      std::printf("spec ok: base dim %d, fiber dim %d, warp %s\n", spec.p(), spec.q(),
                  spec.warp_text.c_str());
    return kExitOk;
  }

  AssemblyReport rep = analyzer.verify_assembly(opts.config(file));
  if (!opts.json_path.empty()) write_json(opts.json_path, to_json(rep));

  std::printf("input: %s  (base dim %d, fiber dim %d)\n", file.c_str(), spec.p(), spec.q());
  std::printf("formula deviations (max relative over %d points):\n", opts.points);
  for (const auto& [name, dev] : rep.formula_deviations)
    std::printf("  %-8s %.3e\n", name.c_str(), dev);
  std::printf("warp scalars max |T| %.3e  |P| %.3e  |Q| %.3e\n", rep.max_abs_T,
              rep.max_abs_P, rep.max_abs_Q);
  double worst_block = 0.0;
  for (const auto& b : rep.grt_block_checks) worst_block = std::max(worst_block, b.worst());
  std::printf("blockwise six-term residuals with solved coefficients: worst %.3e\n",
              worst_block);
  if (!rep.table_cross_check_warnings.empty()) {
    std::printf("printed-table cross-check: %zu mismatching entr%s\n",
                rep.table_cross_check_warnings.size(),
                rep.table_cross_check_warnings.size() == 1 ? "y" : "ies");
    for (const auto& w : rep.table_cross_check_warnings) std::printf("  note: %s\n", w.c_str());
  }
  std::printf("assembled chart classification:\n");
  print_flags(rep.classification);
  for (const auto& w : rep.warnings) std::printf("  warning: %s\n", w.c_str());
  return kExitOk;
}

int cmd_verify_paper(const CommonOpts& opts, const std::string& only_case,
                     const std::string& export_dir) {
  if (!export_dir.empty()) {
    export_corpus(export_dir);
    std::printf("corpus written to %s\n", export_dir.c_str());
  }

  std::vector<std::string> names;
  if (!only_case.empty()) {
    find_case(only_case);  // throws on unknown name
    names.push_back(only_case);
  } else {
    for (const auto& c : builtin_cases()) names.push_back(c.name);
  }

  ClassifyConfig config = opts.config("verify-paper");
  std::vector<CaseReport> reports;
  reports.reserve(names.size());
  std::printf("%-14s %-70s %-8s %s\n", "case", "claim", "verdict", "worst component dev");
  bool all_ok = true;
  for (const auto& name : names) {
    CaseReport r = run_case(name, config);
    std::printf("%-14s %-70s %-8s %.3e\n", r.name.c_str(), r.claim.c_str(),
                r.passed() ? "ok" : "MISMATCH", r.component_worst);
    for (const auto& m : r.mismatches) std::printf("    %s\n", m.c_str());
    if (!r.classification.special_vanishing.empty()) {
      std::printf("    special vanishing:");
      for (const auto& s : r.classification.special_vanishing)
        std::printf(" %s", s.c_str());
      std::printf("\n");
    }
    if (r.fiber_classification) {
      const auto& f = *r.fiber_classification;
      std::printf("    fiber: roter=%s grt=%s conformally_flat=%s ein_level=%s\n",
                  flag_name(f.roter), flag_name(f.grt), flag_name(f.conformally_flat),
                  f.ein_level > 0 ? std::to_string(f.ein_level).c_str() : "none");
    }
    all_ok = all_ok && r.passed();
    reports.push_back(std::move(r));
  }
  if (!opts.json_path.empty())
    write_json(opts.json_path, verify_paper_json(reports, config));
  std::printf("%zu/%zu cases passed\n",
              static_cast<std::size_t>(std::count_if(reports.begin(), reports.end(),
                                                     [](const CaseReport& r) {
                                                       return r.passed();
                                                     })),
              reports.size());
  if (!all_ok) {
    std::fprintf(stderr, "error[E_CLAIMS] expected verdicts not reproduced\n");
    return kExitClaims;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic-numeric curvature analysis of coordinate metrics"};
  app.require_subcommand(1);

  CommonOpts analyze_opts, warp_opts, paper_opts;
  std::string metric_file, spec_file, out_path, only_case, export_dir;
  bool verify = false;

  CLI::App* analyze = app.add_subcommand(
      "analyze", "classify the curvature structure of a metric chart");
  analyze->add_option("metric", metric_file, "metric chart file")->required();
  add_common(analyze, analyze_opts);

  CLI::App* warp = app.add_subcommand(
      "warp", "assemble a warped product and verify the blockwise formulas");
  warp->add_option("spec", spec_file, "warp spec file")->required();
  warp->add_flag("--verify", verify, "verify predicted blocks against direct computation");
  warp->add_option("--out", out_path, "write the assembled chart to this path");
  add_common(warp, warp_opts);

  CLI::App* paper = app.add_subcommand(
      "verify-paper", "run the built-in example corpus against its expected results");
  paper->add_option("--case", only_case, "run a single case by name");
  paper->add_option("--export-corpus", export_dir, "write the corpus files to a directory");
  add_common(paper, paper_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(metric_file, analyze_opts);
    if (warp->parsed()) return cmd_warp(spec_file, warp_opts, verify, out_path);
    if (paper->parsed()) return cmd_verify_paper(paper_opts, only_case, export_dir);
  } catch (const ChartError& e) {
    std::fprintf(stderr, "error[E_INPUT] %s\n", e.what());
    return kExitInput;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error[E_INPUT] %s\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error[E_INPUT] %s\n", e.what());
    return kExitInput;
  } catch (const SamplingError& e) {
    std::fprintf(stderr, "error[E_SAMPLING] %s\n", e.what());
    return kExitNumeric;
  } catch (const EvalError& e) {
    std::fprintf(stderr, "error[E_NUMERIC] %s (in %s)\n", e.what(), e.subexpr.c_str());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[E_NUMERIC] %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
