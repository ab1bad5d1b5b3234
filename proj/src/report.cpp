#include "curvscan/report.hpp"

namespace curvscan {

namespace {

ojson config_json(const ClassifyConfig& c) {
  ojson j;
  j["points"] = c.points;
  j["seed"] = c.seed;
  j["abs_tol"] = c.tol.abs_tol;
  j["rel_tol"] = c.tol.rel_tol;
  j["generator"] = "mt19937_64";
  return j;
}

ojson verdict_json(const DependenceVerdict& v) {
  ojson j;
  ojson coeffs = ojson::array();
  for (Eigen::Index i = 0; i < v.coeffs.size(); ++i) coeffs.push_back(v.coeffs[i]);
  j["coeffs"] = std::move(coeffs);
  j["residual_rel"] = v.residual;
  j["rank"] = v.basis_rank;
  j["degenerate"] = v.degenerate_basis;
  return j;
}

ojson flags_json(const ClassificationReport& rep) {
  ojson f;
  f["flat"] = flag_name(rep.flat);
  f["constant_curvature"] = flag_name(rep.constant_curvature);
  f["conformally_flat"] = flag_name(rep.conformally_flat);
  f["roter"] = flag_name(rep.roter);
  f["grt"] = flag_name(rep.grt);
  if (rep.ein_level > 0)
    f["ein_level"] = rep.ein_level;
  else
    f["ein_level"] = nullptr;
  return f;
}

}  // namespace

ojson to_json(const ClassificationReport& rep) {
  ojson j;
  j["input"] = rep.input;
  j["config"] = config_json(rep.config);
  j["flags"] = flags_json(rep);
  ojson pts = ojson::array();
  for (const auto& pv : rep.per_point) {
    ojson p;
    ojson coords;
    for (std::size_t i = 0; i < pv.point.values.size(); ++i)
      coords[rep.coord_names[i]] = pv.point.values[i];
    p["coords"] = std::move(coords);
    if (rep.n >= 3) {
      p["roter"] = verdict_json(pv.roter);
      p["grt"] = verdict_json(pv.grt);
    } else {
      p["roter"] = nullptr;
      p["grt"] = nullptr;
    }
    ojson ein;
    ojson ranks = ojson::array();
    for (int r : pv.ein_ranks) ranks.push_back(r);
    ein["ranks"] = std::move(ranks);
    p["ein"] = std::move(ein);
    pts.push_back(std::move(p));
  }
  j["per_point"] = std::move(pts);
  ojson sv = ojson::array();
  for (const auto& s : rep.special_vanishing) sv.push_back(s);
  j["special_vanishing"] = std::move(sv);
  ojson exc;
  exc["roter"] = rep.roter_exceptional;
  exc["grt"] = rep.grt_exceptional;
  j["exceptional_locus"] = std::move(exc);
  ojson warn = ojson::array();
  for (const auto& w : rep.warnings) warn.push_back(w);
  j["warnings"] = std::move(warn);
  return j;
}

ojson to_json(const AssemblyReport& rep) {
  ojson j = to_json(rep.classification);
  j["input"] = rep.input;
  ojson devs;
  for (const auto& [name, dev] : rep.formula_deviations) devs[name] = dev;
  j["formula_deviations"] = std::move(devs);
  ojson ws;
  ws["T"] = rep.max_abs_T;
  ws["P"] = rep.max_abs_P;
  ws["Q"] = rep.max_abs_Q;
  j["warp_scalars_max_abs"] = std::move(ws);
  ojson blocks = ojson::array();
  for (const auto& b : rep.grt_block_checks) {
    ojson e;
    e["base"] = b.base;
    e["mixed"] = b.mixed;
    e["fiber"] = b.fiber;
    blocks.push_back(std::move(e));
  }
  j["grt_block_checks"] = std::move(blocks);
  ojson tw = ojson::array();
  for (const auto& w : rep.table_cross_check_warnings) tw.push_back(w);
  j["table_cross_check_warnings"] = std::move(tw);
  for (const auto& w : rep.warnings) j["warnings"].push_back(w);
  return j;
}

ojson to_json(const CaseReport& rep) {
  ojson j;
  j["name"] = rep.name;
  j["claim"] = rep.claim;
  ojson comp;
  comp["count"] = rep.components_checked;
  comp["worst_rel_deviation"] = rep.component_worst;
  comp["pass"] = rep.component_pass;
  j["component_checks"] = std::move(comp);
  j["classification"] = to_json(rep.classification);
  if (rep.fiber_classification)
    j["fiber_classification"] = to_json(*rep.fiber_classification);
  ojson mm = ojson::array();
  for (const auto& m : rep.mismatches) mm.push_back(m);
  j["mismatches"] = std::move(mm);
  j["passed"] = rep.passed();
  return j;
}

ojson verify_paper_json(const std::vector<CaseReport>& reports,
                        const ClassifyConfig& config) {
  ojson j;
  j["config"] = config_json(config);
  ojson cases = ojson::array();
  bool all = true;
  for (const auto& r : reports) {
    cases.push_back(to_json(r));
    all = all && r.passed();
  }
  j["cases"] = std::move(cases);
  j["all_passed"] = all;
  return j;
}

}  // namespace curvscan
