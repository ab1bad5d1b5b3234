#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curvscan/warped.hpp"

namespace curvscan {

/// One built-in worked-example case: a chart (or warped spec), the
/// closed-form curvature components it must reproduce, and the structure
/// flags it is expected to earn.
struct PaperCase {
  std::string name;
  std::string claim;   // human-readable expected-result summary
  std::string anchor;  // which worked-example statement the case instantiates

  std::optional<WarpedSpec> spec;  // present for the warped (M) cases
  MetricChart chart;               // the chart that gets classified

  struct Oracle4 {
    std::array<int, 4> idx;  // 1-based chart indices
    Expr value;
  };
  struct Oracle2 {
    int i, j;  // 1-based
    Expr value;
  };
  std::vector<Oracle4> riemann_oracles;
  std::vector<Oracle2> ricci_oracles;

  std::map<std::string, Flag> expected_flags;
  std::optional<int> expected_ein_level;
  bool expect_special_vanishing = false;
  std::map<std::string, Flag> expected_fiber_flags;  // claims about the fiber factor
};

const std::vector<PaperCase>& builtin_cases();
const PaperCase& find_case(const std::string& name);  // throws on unknown name

struct CaseReport {
  std::string name;
  std::string claim;
  bool component_pass = true;
  double component_worst = 0.0;  // worst relative deviation over all oracles
  int components_checked = 0;
  ClassificationReport classification;
  std::optional<ClassificationReport> fiber_classification;
  std::vector<std::string> mismatches;  // empty iff expectations all met
  bool passed() const { return component_pass && mismatches.empty(); }
};

/// Check every stored closed-form component against direct curvature at
/// seeded points (relative tolerance 1e-9 of the sample's curvature scale)
/// and compare classification flags with the expected ones.
CaseReport run_case(const std::string& name, const ClassifyConfig& config);

/// Write every case to `dir` as metric/spec files, plus the auxiliary
/// product and flat charts used in the documentation examples.
void export_corpus(const std::string& dir);

}  // namespace curvscan
