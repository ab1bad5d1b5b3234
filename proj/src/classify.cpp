#include "curvscan/classify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace curvscan {

const char* flag_name(Flag f) {
  switch (f) {
    case Flag::Pass: return "pass";
    case Flag::Fail: return "fail";
    case Flag::Indeterminate: return "indeterminate";
  }
  return "?";
}

Flag ClassificationReport::flag(const std::string& name) const {
  if (name == "flat") return flat;
  if (name == "constant_curvature") return constant_curvature;
  if (name == "conformally_flat") return conformally_flat;
  if (name == "roter") return roter;
  if (name == "grt") return grt;
  throw std::invalid_argument("unknown flag: " + name);
}

DependenceVerdict solve_span(const Vector& target, const std::vector<Vector>& basis,
                             const Tolerances& tol) {
  if (basis.empty()) throw std::invalid_argument("solve_span: empty basis");
  const Eigen::Index rows = target.size();
  Matrix B(rows, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) B.col(static_cast<Eigen::Index>(i)) = basis[i];

  DependenceVerdict v;
  v.target_norm = target.norm();
  if (rows == 0) {
    v.coeffs = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
    v.residual_absolute = true;
    return v;
  }

  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  Vector inv = Vector::Zero(sv.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    v.singular_values.push_back(sv[i]);
    if (smax > 0.0 && sv[i] / smax > kRankThreshold) {
      inv[i] = 1.0 / sv[i];
      ++rank;
    }
  }
  v.basis_rank = rank;
  v.degenerate_basis = rank < static_cast<int>(basis.size());
  v.coeffs = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * target);

  const double abs_resid = (B * v.coeffs - target).norm();
  if (v.target_norm < tol.abs_tol) {
    v.residual = abs_resid;
    v.residual_absolute = true;
  } else {
    v.residual = abs_resid / v.target_norm;
  }
  return v;
}

DependenceVerdict solve_roter(const CurvatureSample& s, const Tolerances& tol) {
  std::vector<Vector> basis = {
      kulkarni_nomizu(s.g, s.g).vectorize(),
      kulkarni_nomizu(s.g, s.ricci).vectorize(),
      kulkarni_nomizu(s.ricci, s.ricci).vectorize(),
  };
  return solve_span(s.riemann.vectorize(), basis, tol);
}

DependenceVerdict solve_grt(const CurvatureSample& s, const Tolerances& tol) {
  std::vector<Vector> basis = {
      kulkarni_nomizu(s.g, s.g).vectorize(),
      kulkarni_nomizu(s.g, s.ricci).vectorize(),
      kulkarni_nomizu(s.ricci, s.ricci).vectorize(),
      kulkarni_nomizu(s.g, s.ricci2).vectorize(),
      kulkarni_nomizu(s.ricci, s.ricci2).vectorize(),
      kulkarni_nomizu(s.ricci2, s.ricci2).vectorize(),
  };
  return solve_span(s.riemann.vectorize(), basis, tol);
}

ZeroCheck check_flat(const CurvatureSample& s, const Tolerances& tol) {
  ZeroCheck z;
  z.scale = s.riemann.max_abs();
  z.max_abs = z.scale;
  z.pass = tol.is_zero(z.max_abs, z.scale);
  return z;
}

ZeroCheck check_constant_curvature(const CurvatureSample& s, const Tolerances& tol) {
  ZeroCheck z;
  z.scale = s.riemann.max_abs();
  const int n = s.n;
  if (n < 2) {  // a 1-dimensional chart carries no curvature
    z.pass = true;
    return z;
  }
  Sym4 resid = s.riemann;
  resid -= (s.kappa / (n * (n - 1))) * s.gaussian;
  z.max_abs = resid.max_abs();
  z.pass = tol.is_zero(z.max_abs, z.scale);
  return z;
}

ConformalCheck check_conformally_flat(const CurvatureSample& s, const Tolerances& tol) {
  ConformalCheck c;
  if (s.n < 3) throw std::invalid_argument("conformal check requires dimension >= 3");
  c.scale = s.riemann.max_abs();
  c.max_abs = s.weyl->max_abs();
  if (s.n == 3) {
    // C vanishes identically in dimension 3; the Cotton tensor would be
    // needed for a determinate answer.
    c.flag = Flag::Indeterminate;
    return c;
  }
  c.flag = tol.is_zero(c.max_abs, c.scale) ? Flag::Pass : Flag::Fail;
  return c;
}

int ein_rank(const CurvatureSample& s, int level) {
  std::vector<Vector> cols = {vec_upper(s.g), vec_upper(s.ricci)};
  if (level >= 2) cols.push_back(vec_upper(s.ricci2));
  if (level >= 3) cols.push_back(vec_upper(s.ricci3));
  if (level >= 4) cols.push_back(vec_upper(s.ricci4));
  Matrix A(cols[0].size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) A.col(static_cast<Eigen::Index>(i)) = cols[i];
  Eigen::JacobiSVD<Matrix> svd(A);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (smax > 0.0 && sv[i] / smax > kRankThreshold) ++rank;
  return rank;
}

bool check_ein(const CurvatureSample& s, int level) {
  return ein_rank(s, level) < level + 1;
}

namespace {

bool coeffs_match(const Vector& have, const Vector& want, const Tolerances& tol) {
  const double scale = std::max(have.cwiseAbs().maxCoeff(), want.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < have.size(); ++i)
    if (std::abs(have[i] - want[i]) > tol.abs_tol + tol.rel_tol * scale) return false;
  return true;
}

}  // namespace

bool exceptional_locus_roter(const DependenceVerdict& v, const CurvatureSample& s,
                             const Tolerances& tol) {
  const int n = s.n;
  if (n < 3) return false;
  Vector want(3);
  want << -s.kappa / (2.0 * (n - 1) * (n - 2)), 1.0 / (n - 2), 0.0;
  return coeffs_match(v.coeffs, want, tol);
}

bool exceptional_locus_grt(const DependenceVerdict& v, const CurvatureSample& s,
                           const Tolerances& tol) {
  const int n = s.n;
  if (n < 3) return false;
  // exception family parameterized by L4:
  //   L1 = 1/2 (L4 (kappa^2 - kappa2)/(n-1) - kappa/((n-1)(n-2)))
  //   L2 = 1/(n-2) - L4 kappa,  L3 = 1/2 L4 (n-2),  L5 = L6 = 0
  const double L4 = v.coeffs[3];
  Vector want(6);
  want << 0.5 * (L4 * (s.kappa * s.kappa - s.kappa2) / (n - 1) -
                 s.kappa / (static_cast<double>(n - 1) * (n - 2))),
      1.0 / (n - 2) - L4 * s.kappa, 0.5 * L4 * (n - 2), L4, 0.0, 0.0;
  return coeffs_match(v.coeffs, want, tol);
}

std::vector<CurvatureSample> draw_samples(const CurvatureEngine& engine, int count,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& domain = engine.chart().domain();
  const int n = engine.chart().dim();
  auto uniform = [&](double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };

  std::vector<CurvatureSample> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    bool accepted = false;
    for (int attempt = 0; attempt <= 100 && !accepted; ++attempt) {
      PointSample p;
      p.values.resize(n);
      for (int i = 0; i < n; ++i) p.values[i] = uniform(domain[i].lo, domain[i].hi);
      try {
        out.push_back(engine.sample(p));
        accepted = true;
      } catch (const EvalError&) {
      } catch (const SingularMetricError&) {
      }
    }
    if (!accepted)
      throw SamplingError(
          "sampling exhausted: no valid point found in 100 attempts (domain nearly "
          "everywhere singular)");
  }
  return out;
}

ClassificationReport classify(const MetricChart& chart, const ClassifyConfig& config) {
  CurvatureEngine engine(chart);
  ClassificationReport rep;
  rep.input = config.input_label;
  rep.config = config;
  rep.n = chart.dim();
  rep.coord_names = chart.coords();
  const int n = rep.n;
  const Tolerances& tol = config.tol;

  auto samples = draw_samples(engine, config.points, config.seed);

  const bool span_ok = n >= 3;  // the span conditions need the conformal regime
  bool all_flat = true, all_cc = true, all_cflat = true, all_roter = true,
       all_grt = true;
  bool any_cflat_indet = false;
  std::array<bool, 4> all_ein{true, true, true, true};
  bool all_rexc = true, all_gexc = true;
  double kappa_min = 0.0, kappa_max = 0.0, kappa_scale = 0.0;

  for (std::size_t idx = 0; idx < samples.size(); ++idx) {
    const CurvatureSample& s = samples[idx];
    PointVerdicts pv;
    pv.point = s.point;
    pv.kappa = s.kappa;
    pv.flat = check_flat(s, tol);
    pv.constant_curvature = check_constant_curvature(s, tol);
    if (n >= 3) pv.conformally_flat = check_conformally_flat(s, tol);
    if (span_ok) {
      pv.roter = solve_roter(s, tol);
      pv.grt = solve_grt(s, tol);
      if (pv.roter.passes(tol))
        pv.roter_exceptional = exceptional_locus_roter(pv.roter, s, tol);
      if (pv.grt.passes(tol)) pv.grt_exceptional = exceptional_locus_grt(pv.grt, s, tol);
    }
    for (int lev = 1; lev <= 4; ++lev) {
      pv.ein_ranks[lev - 1] = ein_rank(s, lev);
      pv.ein[lev - 1] = pv.ein_ranks[lev - 1] < lev + 1;
    }
    // Ein(i) implies Ein(i+1); keep the numeric ranks as computed
    for (int lev = 1; lev < 4; ++lev)
      if (pv.ein[lev - 1]) pv.ein[lev] = true;

    all_flat &= pv.flat.pass;
    all_cc &= pv.constant_curvature.pass;
    if (n >= 4)
      all_cflat &= pv.conformally_flat.flag == Flag::Pass;
    else
      any_cflat_indet = true;
    if (span_ok) {
      all_roter &= pv.roter.passes(tol);
      all_grt &= pv.grt.passes(tol);
      all_rexc &= pv.roter_exceptional;
      all_gexc &= pv.grt_exceptional;
    }
    for (int lev = 0; lev < 4; ++lev) all_ein[lev] = all_ein[lev] && pv.ein[lev];

    if (idx == 0) {
      kappa_min = kappa_max = s.kappa;
    } else {
      kappa_min = std::min(kappa_min, s.kappa);
      kappa_max = std::max(kappa_max, s.kappa);
    }
    kappa_scale = std::max({kappa_scale, std::abs(s.kappa)});
    rep.per_point.push_back(std::move(pv));
  }

  rep.flat = all_flat ? Flag::Pass : Flag::Fail;

  // constant curvature additionally demands one kappa across points
  const double kappa_spread = kappa_max - kappa_min;
  const bool kappa_constant = kappa_spread <= tol.abs_tol + tol.rel_tol * kappa_scale;
  rep.constant_curvature = (all_cc && kappa_constant) ? Flag::Pass : Flag::Fail;

  if (n >= 4)
    rep.conformally_flat = all_cflat ? Flag::Pass : Flag::Fail;
  else
    rep.conformally_flat = Flag::Indeterminate;
  rep.roter = span_ok ? (all_roter ? Flag::Pass : Flag::Fail) : Flag::Indeterminate;
  rep.grt = span_ok ? (all_grt ? Flag::Pass : Flag::Fail) : Flag::Indeterminate;

  // hierarchy closure: flat => constant curvature => conformally flat
  // => Roter => generalized Roter
  auto promote = [&](Flag& lower, Flag upper, const char* what) {
    if (upper == Flag::Pass && lower == Flag::Fail) {
      rep.warnings.push_back(std::string("hierarchy override: ") + what);
      lower = Flag::Pass;
    }
  };
  promote(rep.constant_curvature, rep.flat, "flat implies constant curvature");
  if (rep.constant_curvature == Flag::Pass && n >= 3 &&
      rep.conformally_flat != Flag::Pass) {
    // constant curvature implies conformal flatness in every dimension >= 3
    rep.conformally_flat = Flag::Pass;
  }
  if (span_ok) {
    promote(rep.roter, rep.conformally_flat, "conformally flat implies Roter type");
    promote(rep.grt, rep.roter, "Roter implies generalized Roter type");
  }
  (void)any_cflat_indet;

  rep.ein_level = 0;
  for (int lev = 1; lev <= 4; ++lev)
    if (all_ein[lev - 1]) {
      rep.ein_level = lev;
      break;
    }

  // coefficients identically zero across points (associated scalars are
  // pointwise functions, so each point is tested against its own scale)
  auto collect_vanishing = [&](bool enabled, const char* prefix, int count,
                               auto getter) {
    if (!enabled) return;
    for (int i = 0; i < count; ++i) {
      bool zero_everywhere = true;
      for (const auto& pv : rep.per_point) {
        const Vector& c = getter(pv);
        const double scale = c.cwiseAbs().maxCoeff();
        if (std::abs(c[i]) > tol.abs_tol + tol.rel_tol * scale) {
          zero_everywhere = false;
          break;
        }
      }
      if (zero_everywhere)
        rep.special_vanishing.push_back(prefix + std::to_string(i + 1));
    }
  };
  collect_vanishing(rep.roter == Flag::Pass && span_ok, "N", 3,
                    [](const PointVerdicts& pv) -> const Vector& { return pv.roter.coeffs; });
  collect_vanishing(rep.grt == Flag::Pass && span_ok, "L", 6,
                    [](const PointVerdicts& pv) -> const Vector& { return pv.grt.coeffs; });

  rep.roter_exceptional = span_ok && rep.roter == Flag::Pass && all_rexc;
  rep.grt_exceptional = span_ok && rep.grt == Flag::Pass && all_gexc;
  return rep;
}

}  // namespace curvscan
