#include "curvscan/warped.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace curvscan {

namespace {

std::string strip_line(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

WarpedSpec::WarpedSpec(MetricChart base_, MetricChart fiber_, const std::string& warp_source)
    : base(std::move(base_)), fiber(std::move(fiber_)), warp_text(warp_source) {
  for (const auto& c : fiber.coords())
    if (base.coord_index(c) >= 0)
      throw ChartError("coordinate name collision between base and fiber: " + c);

  std::map<std::string, double> merged = base.params();
  for (const auto& [name, value] : fiber.params()) {
    auto it = merged.find(name);
    if (it != merged.end() && it->second != value)
      throw ChartError("parameter '" + name + "' bound to different values in base and fiber");
    merged[name] = value;
  }
  std::vector<std::string> param_names;
  for (const auto& [name, _] : merged) param_names.push_back(name);

  try {
    warp = parse_expr(warp_source, base.coords(), param_names);
  } catch (const ParseError& e) {
    throw ChartError(std::string("warp expression: ") + e.what());
  }
}

MetricChart WarpedSpec::assemble() const {
  const int pdim = p(), n_total = n();
  std::vector<std::string> coords = base.coords();
  coords.insert(coords.end(), fiber.coords().begin(), fiber.coords().end());

  std::vector<std::vector<Expr>> entries(n_total);
  for (int i = 0; i < n_total; ++i) entries[i].resize(n_total - i);
  for (int i = 0; i < pdim; ++i)
    for (int j = i; j < pdim; ++j)
      if (base.has_entry(i, j)) entries[i][j - i] = base.entry(i, j);
  for (int i = 0; i < q(); ++i)
    for (int j = i; j < q(); ++j)
      if (fiber.has_entry(i, j))
        entries[pdim + i][j - i] = warp * fiber.entry(i, j);

  std::map<std::string, double> merged = base.params();
  for (const auto& [name, value] : fiber.params()) merged[name] = value;

  std::vector<Interval> domain = base.domain();
  domain.insert(domain.end(), fiber.domain().begin(), fiber.domain().end());

  return MetricChart(std::move(coords), std::move(entries), std::move(merged),
                     std::move(domain));
}

WarpedSpec WarpedSpec::from_string(const std::string& text, const std::string& dir) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::string base_path, fiber_path, warp_src;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    line = strip_line(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "base" || kw == "fiber") {
      std::string path;
      ls >> path;
      if (path.empty())
        throw ChartError("missing path at line " + std::to_string(lineno), lineno);
      (kw == "base" ? base_path : fiber_path) = path;
    } else if (kw == "warp") {
      std::string colon;
      ls >> colon;
      if (colon != ":")
        throw ChartError("malformed warp line at line " + std::to_string(lineno), lineno);
      std::getline(ls, warp_src);
      warp_src = strip_line(warp_src);
      if (warp_src.empty())
        throw ChartError("missing warp expression at line " + std::to_string(lineno), lineno);
    } else {
      throw ChartError("unknown keyword '" + kw + "' at line " + std::to_string(lineno),
                       lineno);
    }
  }
  if (base_path.empty()) throw ChartError("missing 'base' line");
  if (fiber_path.empty()) throw ChartError("missing 'fiber' line");
  if (warp_src.empty()) throw ChartError("missing 'warp' line");

  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& p) {
    fs::path fp(p);
    if (fp.is_absolute() || dir.empty()) return fp;
    return fs::path(dir) / fp;
  };
  MetricChart base_chart = MetricChart::load(resolve(base_path).string());
  MetricChart fiber_chart = MetricChart::load(resolve(fiber_path).string());
  return WarpedSpec(std::move(base_chart), std::move(fiber_chart), warp_src);
}

WarpedSpec WarpedSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ChartError("cannot open warp spec file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string WarpedSpec::to_file_string(const std::string& base_path,
                                       const std::string& fiber_path) const {
  std::ostringstream out;
  out << "base " << base_path << "\n";
  out << "fiber " << fiber_path << "\n";
  out << "warp : " << warp_text << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// BlockTensor4
// ---------------------------------------------------------------------------

Sym4 BlockTensor4::to_full() const {
  const int n = p + q;
  Sym4 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int pi = out.pair_index(i, j);
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          int pj = out.pair_index(k, l);
          if (pi > pj) continue;
          double v = 0.0;
          const bool ib = i < p, jb = j < p, kb = k < p, lb = l < p;
          if (ib && jb && kb && lb) {
            v = base(i, j, k, l);
          } else if (!ib && !jb && !kb && !lb) {
            v = fiber(i - p, j - p, k - p, l - p);
          } else if (ib && !jb && kb && !lb) {
            // (a, alpha, b, beta) orientation; all other mixed patterns
            // vanish or follow by antisymmetry
            v = m(i, j - p, k, l - p);
          }
          out.set_class(pi, pj, v);
        }
    }
  return out;
}

// ---------------------------------------------------------------------------
// WarpedAnalyzer
// ---------------------------------------------------------------------------

WarpedAnalyzer::WarpedAnalyzer(const WarpedSpec& spec)
    : spec_(spec),
      assembled_(spec.assemble()),
      base_engine_(spec_.base),
      fiber_engine_(spec_.fiber),
      full_engine_(assembled_) {
  const int p = spec_.p();
  dwarp_.resize(p);
  d2warp_.assign(p, std::vector<Expr>(p));
  for (int a = 0; a < p; ++a) {
    dwarp_[a] = differentiate(spec_.warp, spec_.base.coords()[a]);
    for (int b = 0; b < p; ++b)
      d2warp_[a][b] = differentiate(dwarp_[a], spec_.base.coords()[b]);
  }
}

PointSample WarpedAnalyzer::base_point(const PointSample& full) const {
  PointSample p;
  p.values.assign(full.values.begin(), full.values.begin() + spec_.p());
  return p;
}

PointSample WarpedAnalyzer::fiber_point(const PointSample& full) const {
  PointSample p;
  p.values.assign(full.values.begin() + spec_.p(), full.values.end());
  return p;
}

WarpScalars WarpedAnalyzer::warp_scalars(const PointSample& base_pt) const {
  const int p = spec_.p(), q = spec_.q();
  WarpScalars ws;
  ws.base_bundle = base_engine_.sample(base_pt);

  Env env = spec_.base.env_at(base_pt);
  // the warp may reference parameters declared only on the fiber side
  for (const auto& [name, value] : spec_.fiber.params())
    env.emplace(name, value);

  ws.f = evaluate(spec_.warp, env);
  if (ws.f <= 0.0)
    throw ChartError("warping function non-positive at sample point (f = " +
                     std::to_string(ws.f) + ")");
  ws.df = Vector(p);
  for (int a = 0; a < p; ++a) ws.df[a] = evaluate(dwarp_[a], env);

  // nabla_b f_a = d_b d_a f - Gammabar^c_ab f_c
  ws.hess = Matrix::Zero(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      double v = evaluate(d2warp_[a][b], env);
      for (int c = 0; c < p; ++c) v -= ws.base_bundle.gamma[c](a, b) * ws.df[c];
      ws.hess(a, b) = v;
    }
  ws.hess = ((ws.hess + ws.hess.transpose()) / 2).eval();

  ws.T = -(1.0 / (2.0 * ws.f)) *
         (ws.hess - (1.0 / (2.0 * ws.f)) * (ws.df * ws.df.transpose()));
  const Matrix& gi = ws.base_bundle.g_inv;
  ws.tr_T = (gi * ws.T).trace();
  ws.P = ws.df.dot(gi * ws.df) / (4.0 * ws.f * ws.f);
  ws.Q = ws.f * ((q - 1) * ws.P - ws.tr_T);

  ws.T2 = ws.T * gi * ws.T;
  ws.T2 = ((ws.T2 + ws.T2.transpose()) / 2).eval();
  Matrix st = ws.base_bundle.ricci * gi * ws.T;
  ws.s_dot_t_asym = ((st - st.transpose()) / 2).cwiseAbs().maxCoeff();
  ws.S_dot_T = ((st + st.transpose()) / 2).eval();
  ws.tr_T2 = (gi * ws.T2).trace();
  ws.tr_S_dot_T = (gi * ws.S_dot_T).trace();
  return ws;
}

WarpedAnalyzer::BlockForms WarpedAnalyzer::block_forms(const PointSample& full) const {
  BlockForms bf;
  bf.ws = warp_scalars(base_point(full));
  bf.fiber_bundle = fiber_engine_.sample(fiber_point(full));
  const int q = spec_.q();
  const double f = bf.ws.f, Q = bf.ws.Q;

  // The engine follows the stated component formula for R; the warped
  // block tables are written in the opposite curvature orientation, which
  // flips every odd power of S. In engine terms:
  //   S_ab = Sbar + (n-p) T,   S_{al be} = S~ - Q g~.
  bf.gB = bf.ws.base_bundle.g;
  bf.SB = bf.ws.base_bundle.ricci + q * bf.ws.T;
  // expanding S^2 on the base block gives the Sbar.T cross term with
  // coefficient 2(n-p); for one-dimensional bases (Sbar = 0) it drops out
  bf.S2B = bf.ws.base_bundle.ricci2 + 2.0 * q * bf.ws.S_dot_T +
           static_cast<double>(q) * q * bf.ws.T2;
  bf.gF = f * bf.fiber_bundle.g;
  bf.SF = bf.fiber_bundle.ricci - Q * bf.fiber_bundle.g;
  bf.S2F = (bf.fiber_bundle.ricci2 - 2.0 * Q * bf.fiber_bundle.ricci +
            Q * Q * bf.fiber_bundle.g) /
           f;
  return bf;
}

BlockTensor4 WarpedAnalyzer::predicted_riemann(const PointSample& full) const {
  const BlockForms bf = block_forms(full);
  const int p = spec_.p(), q = spec_.q();
  BlockTensor4 out(p, q);
  out.base = bf.ws.base_bundle.riemann;
  // engine orientation of R_{a alpha b beta} = f T_ab g~ is -f T_ab g~
  for (int a = 0; a < p; ++a)
    for (int al = 0; al < q; ++al)
      for (int b = 0; b < p; ++b)
        for (int be = 0; be < q; ++be)
          out.m(a, al, b, be) = -bf.ws.f * bf.ws.T(a, b) * bf.fiber_bundle.g(al, be);
  out.fiber = bf.ws.f * bf.fiber_bundle.riemann;
  out.fiber -= (bf.ws.f * bf.ws.f * bf.ws.P) * bf.fiber_bundle.gaussian;
  return out;
}

Matrix WarpedAnalyzer::RicciBlocks::full_S(int p, int q) const {
  Matrix m = Matrix::Zero(p + q, p + q);
  m.topLeftCorner(p, p) = S_base;
  m.bottomRightCorner(q, q) = S_fiber;
  return m;
}

Matrix WarpedAnalyzer::RicciBlocks::full_S2(int p, int q) const {
  Matrix m = Matrix::Zero(p + q, p + q);
  m.topLeftCorner(p, p) = S2_base;
  m.bottomRightCorner(q, q) = S2_fiber;
  return m;
}

WarpedAnalyzer::RicciBlocks WarpedAnalyzer::predicted_ricci_scalar(
    const PointSample& full) const {
  const BlockForms bf = block_forms(full);
  const int q = spec_.q();
  RicciBlocks rb;
  rb.S_base = bf.SB;
  rb.S_fiber = bf.SF;
  rb.S2_base = bf.S2B;
  rb.S2_fiber = bf.S2F;
  // contracting the S blocks fixes the sign of the warp term
  rb.kappa = bf.ws.base_bundle.kappa + bf.fiber_bundle.kappa / bf.ws.f -
             q * ((q - 1) * bf.ws.P - 2.0 * bf.ws.tr_T);
  return rb;
}

BlockTensor4 WarpedAnalyzer::wedge_blocks(const Matrix& Ab, const Matrix& Af,
                                          const Matrix& Bb, const Matrix& Bf) const {
  const int p = spec_.p(), q = spec_.q();
  BlockTensor4 out(p, q);
  out.base = kulkarni_nomizu(Ab, Bb);
  out.fiber = kulkarni_nomizu(Af, Bf);
  for (int a = 0; a < p; ++a)
    for (int al = 0; al < q; ++al)
      for (int b = 0; b < p; ++b)
        for (int be = 0; be < q; ++be)
          out.m(a, al, b, be) = -Ab(a, b) * Bf(al, be) - Bb(a, b) * Af(al, be);
  return out;
}

std::array<BlockTensor4, 6> WarpedAnalyzer::predicted_wedges(
    const PointSample& full) const {
  const BlockForms bf = block_forms(full);
  return {
      wedge_blocks(bf.gB, bf.gF, bf.gB, bf.gF),    // g^g
      wedge_blocks(bf.gB, bf.gF, bf.SB, bf.SF),    // g^S
      wedge_blocks(bf.SB, bf.SF, bf.SB, bf.SF),    // S^S
      wedge_blocks(bf.gB, bf.gF, bf.S2B, bf.S2F),  // g^S2
      wedge_blocks(bf.SB, bf.SF, bf.S2B, bf.S2F),  // S^S2
      wedge_blocks(bf.S2B, bf.S2F, bf.S2B, bf.S2F)  // S2^S2
  };
}

namespace {

double mixed_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

BlockResiduals WarpedAnalyzer::residuals_against(const BlockTensor4& target,
                                                 const std::vector<BlockTensor4>& basis,
                                                 const Vector& coeffs) const {
  Sym4 rbase = target.base;
  Sym4 rfiber = target.fiber;
  std::vector<double> rmixed = target.mixed;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    rbase -= coeffs[static_cast<Eigen::Index>(i)] * basis[i].base;
    rfiber -= coeffs[static_cast<Eigen::Index>(i)] * basis[i].fiber;
    for (std::size_t k = 0; k < rmixed.size(); ++k)
      rmixed[k] -= coeffs[static_cast<Eigen::Index>(i)] * basis[i].mixed[k];
  }
  const double tb = target.base.vectorize().norm();
  const double tm = mixed_norm(target.mixed);
  const double tf = target.fiber.vectorize().norm();
  const double total = std::sqrt(tb * tb + tm * tm + tf * tf);
  auto denom = [&](double block_norm) {
    if (block_norm >= 1e-12) return block_norm;
    if (total >= 1e-12) return total;
    return 1.0;
  };
  BlockResiduals r;
  r.base = rbase.vectorize().norm() / denom(tb);
  r.mixed = mixed_norm(rmixed) / denom(tm);
  r.fiber = rfiber.vectorize().norm() / denom(tf);
  return r;
}

BlockResiduals WarpedAnalyzer::check_grt_blocks(const Vector& L,
                                                const PointSample& full) const {
  auto wedges = predicted_wedges(full);
  std::vector<BlockTensor4> basis(wedges.begin(), wedges.end());
  return residuals_against(predicted_riemann(full), basis, L);
}

BlockResiduals WarpedAnalyzer::check_rt_blocks(const Vector& N,
                                               const PointSample& full) const {
  auto wedges = predicted_wedges(full);
  std::vector<BlockTensor4> basis(wedges.begin(), wedges.begin() + 3);
  return residuals_against(predicted_riemann(full), basis, N);
}

BlockResiduals WarpedAnalyzer::check_cflat_warp(const PointSample& full) const {
  const int n = spec_.n();
  const double kappa = predicted_ricci_scalar(full).kappa;
  Vector N(3);
  N << -kappa / (2.0 * (n - 1) * (n - 2)), 1.0 / (n - 2), 0.0;
  return check_rt_blocks(N, full);
}

namespace {

struct IngredientVectors {
  // coefficient vectors of the g, S, S^2 blocks over the ingredient bases
  // [gbar, Sbar, Sbar^2, T, T^2, Sbar.T] and [g~, S~, S~2]
  Vector gB, SB, S2B;
  Vector gF, SF, S2F;
  double r_mixed_T_g;  // ingredient entry of the mixed Riemann block (T, g~)
};

Vector unit6(int i) {
  Vector v = Vector::Zero(6);
  v[i] = 1.0;
  return v;
}
Vector unit3(int i) {
  Vector v = Vector::Zero(3);
  v[i] = 1.0;
  return v;
}

// `engine` selects the engine curvature orientation; otherwise the
// orientation the printed tables use (S and R flipped).
IngredientVectors ingredient_vectors(double f, double Q, int q, bool engine) {
  const double s = engine ? 1.0 : -1.0;
  IngredientVectors iv;
  iv.gB = unit6(0);
  iv.SB = unit6(1) + s * q * unit6(3);
  iv.S2B = unit6(2) + s * 2.0 * q * unit6(5) + static_cast<double>(q) * q * unit6(4);
  iv.gF = f * unit3(0);
  iv.SF = unit3(1) - s * Q * unit3(0);
  iv.S2F = (unit3(2) - s * 2.0 * Q * unit3(1) + Q * Q * unit3(0)) / f;
  iv.r_mixed_T_g = -s * f;
  return iv;
}

struct CoefficientTables {
  Matrix base;   // 6x6, condition on the base block
  Matrix mixed;  // 6x3, sum L_i W_i - R on the mixed block
  Matrix fiber;  // 3x3, expansion of f R~ over fiber wedges
};

CoefficientTables derive_tables(const IngredientVectors& iv, const Vector& L,
                                double f, double P) {
  const std::array<std::pair<const Vector*, const Vector*>, 6> factors = {
      std::make_pair(&iv.gB, &iv.gB), {&iv.gB, &iv.SB},   {&iv.SB, &iv.SB},
      {&iv.gB, &iv.S2B},              {&iv.SB, &iv.S2B},  {&iv.S2B, &iv.S2B}};
  const std::array<std::pair<const Vector*, const Vector*>, 6> factors_f = {
      std::make_pair(&iv.gF, &iv.gF), {&iv.gF, &iv.SF},   {&iv.SF, &iv.SF},
      {&iv.gF, &iv.S2F},              {&iv.SF, &iv.S2F},  {&iv.S2F, &iv.S2F}};
  CoefficientTables t;
  t.base = Matrix::Zero(6, 6);
  t.mixed = Matrix::Zero(6, 3);
  t.fiber = Matrix::Zero(3, 3);
  for (int w = 0; w < 6; ++w) {
    const Vector &ub = *factors[w].first, &vb = *factors[w].second;
    const Vector &uf = *factors_f[w].first, &vf = *factors_f[w].second;
    t.base += L[w] * 0.5 * (ub * vb.transpose() + vb * ub.transpose());
    t.mixed += L[w] * (-(ub * vf.transpose() + vb * uf.transpose()));
    t.fiber += L[w] * 0.5 * (uf * vf.transpose() + vf * uf.transpose());
  }
  t.mixed(3, 0) -= iv.r_mixed_T_g;  // subtract the Riemann mixed block
  // fiber block: R = f R~ - f^2 P G~, so the f R~ expansion picks up an
  // extra g~^g~ term (same form in either orientation)
  t.fiber(0, 0) += f * f * P / 2.0;
  return t;
}

}  // namespace

CorollaryScalars WarpedAnalyzer::corollary_scalars(const PointSample& full,
                                                   const Vector& L,
                                                   const Tolerances& tol) const {
  const BlockForms bf = block_forms(full);
  const int p = spec_.p(), q = spec_.q();
  const double f = bf.ws.f, Q = bf.ws.Q;

  const IngredientVectors iv = ingredient_vectors(f, Q, q, /*engine=*/true);
  const CoefficientTables tables = derive_tables(iv, L, f, bf.ws.P);

  // traces of the base ingredients close the mixed identity into a linear
  // dependence of g~, S~, S~2 with coefficients (J3, J2, J1)
  Vector traces(6);
  traces << p, bf.ws.base_bundle.kappa, bf.ws.base_bundle.kappa2, bf.ws.tr_T,
      bf.ws.tr_T2, bf.ws.tr_S_dot_T;

  CorollaryScalars cs;
  cs.J3 = traces.dot(tables.mixed.col(0));
  cs.J2 = traces.dot(tables.mixed.col(1));
  cs.J1 = traces.dot(tables.mixed.col(2));

  const double jscale = std::max({std::abs(cs.J1), std::abs(cs.J2), std::abs(cs.J3)});
  auto jzero = [&](double v) { return std::abs(v) <= tol.abs_tol + tol.rel_tol * jscale; };
  cs.fiber_roter = !jzero(cs.J1);
  cs.fiber_constant_curvature = jzero(cs.J1) && !jzero(cs.J2);

  if (cs.fiber_roter) {
    // eliminate the fiber S^2 from the fiber-block matrix and test the
    // remaining S~^S~ coefficient
    const double sigma = -cs.J2 / cs.J1;
    const double m_ss = tables.fiber(1, 1);
    const double m_ss2 = tables.fiber(1, 2);
    const double m_s2s2 = tables.fiber(2, 2);
    cs.cflat_coeff = m_ss + 2.0 * sigma * m_ss2 + sigma * sigma * m_s2s2;
    const double cscale = std::max(
        {std::abs(m_ss), std::abs(2.0 * sigma * m_ss2), std::abs(sigma * sigma * m_s2s2)});
    cs.fiber_conformally_flat =
        std::abs(cs.cflat_coeff) <= tol.abs_tol + tol.rel_tol * cscale;
  }
  return cs;
}

void WarpedAnalyzer::validate_warp(int count, std::uint64_t seed) const {
  auto samples = draw_samples(base_engine_, count, seed);
  for (const auto& s : samples) warp_scalars(s.point);  // throws when f <= 0
}

std::vector<std::pair<std::string, double>> WarpedAnalyzer::compare_at(
    const CurvatureSample& direct, const BlockTensor4& pred_R,
    const RicciBlocks& pred_ricci, const std::array<BlockTensor4, 6>& pred_w) const {
  const int p = spec_.p(), q = spec_.q();
  std::vector<std::pair<std::string, double>> devs;

  auto rel4 = [](const Sym4& pred, const Sym4& ref) {
    Sym4 d = pred;
    d -= ref;
    return d.max_abs() / std::max(ref.max_abs(), 1e-12);
  };
  auto rel2 = [](const Matrix& pred, const Matrix& ref) {
    return (pred - ref).cwiseAbs().maxCoeff() /
           std::max(ref.cwiseAbs().maxCoeff(), 1e-12);
  };

  devs.emplace_back("R", rel4(pred_R.to_full(), direct.riemann));
  devs.emplace_back("S", rel2(pred_ricci.full_S(p, q), direct.ricci));
  const double kdenom = std::max(
      {std::abs(direct.kappa), direct.ricci.cwiseAbs().maxCoeff(), 1e-12});
  devs.emplace_back("kappa", std::abs(pred_ricci.kappa - direct.kappa) / kdenom);
  devs.emplace_back("S2", rel2(pred_ricci.full_S2(p, q), direct.ricci2));

  const Sym4 w_gg = kulkarni_nomizu(direct.g, direct.g);
  const Sym4 w_gs = kulkarni_nomizu(direct.g, direct.ricci);
  const Sym4 w_ss = kulkarni_nomizu(direct.ricci, direct.ricci);
  const Sym4 w_gs2 = kulkarni_nomizu(direct.g, direct.ricci2);
  const Sym4 w_ss2 = kulkarni_nomizu(direct.ricci, direct.ricci2);
  const Sym4 w_s2s2 = kulkarni_nomizu(direct.ricci2, direct.ricci2);
  devs.emplace_back("g^g", rel4(pred_w[0].to_full(), w_gg));
  devs.emplace_back("g^S", rel4(pred_w[1].to_full(), w_gs));
  devs.emplace_back("S^S", rel4(pred_w[2].to_full(), w_ss));
  devs.emplace_back("g^S2", rel4(pred_w[3].to_full(), w_gs2));
  devs.emplace_back("S^S2", rel4(pred_w[4].to_full(), w_ss2));
  devs.emplace_back("S2^S2", rel4(pred_w[5].to_full(), w_s2s2));
  return devs;
}

AssemblyReport WarpedAnalyzer::verify_assembly(const ClassifyConfig& config,
                                               bool with_classification) const {
  AssemblyReport rep;
  rep.input = config.input_label;
  rep.config = config;

  auto samples = draw_samples(full_engine_, config.points, config.seed);

  std::vector<std::pair<std::string, double>> worst;
  double asym_worst = 0.0;
  for (const auto& s : samples) {
    const auto bf = block_forms(s.point);  // also validates warp positivity
    asym_worst = std::max(asym_worst, bf.ws.s_dot_t_asym);
    rep.max_abs_T = std::max(rep.max_abs_T, bf.ws.T.cwiseAbs().maxCoeff());
    rep.max_abs_P = std::max(rep.max_abs_P, std::abs(bf.ws.P));
    rep.max_abs_Q = std::max(rep.max_abs_Q, std::abs(bf.ws.Q));

    auto devs = compare_at(s, predicted_riemann(s.point),
                           predicted_ricci_scalar(s.point), predicted_wedges(s.point));
    if (worst.empty()) {
      worst = devs;
    } else {
      for (std::size_t i = 0; i < devs.size(); ++i)
        worst[i].second = std::max(worst[i].second, devs[i].second);
    }
  }
  rep.formula_deviations = std::move(worst);
  if (asym_worst > 1e-10) {
    std::ostringstream msg;
    msg << "Sbar.T had a nonzero antisymmetric part (max " << asym_worst
        << "); symmetrized before use";
    rep.warnings.push_back(msg.str());
  }

  if (with_classification) {
    rep.classification = classify(assembled_, config);
    // classify() draws the same seeded points, so verdicts line up with
    // the samples above
    for (std::size_t i = 0; i < rep.classification.per_point.size(); ++i) {
      const auto& pv = rep.classification.per_point[i];
      rep.grt_block_checks.push_back(check_grt_blocks(pv.grt.coeffs, pv.point));
    }
    if (!rep.classification.per_point.empty()) {
      const auto& first = rep.classification.per_point.front();
      rep.table_cross_check_warnings = table_cross_check(first.grt.coeffs, first.point);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// printed-table cross-check
// ---------------------------------------------------------------------------

std::vector<std::string> WarpedAnalyzer::table_cross_check(const Vector& L,
                                                           const PointSample& full) const {
  const BlockForms bf = block_forms(full);
  const int n = spec_.n(), p = spec_.p(), q = spec_.q();
  const double f = bf.ws.f, Q = bf.ws.Q, P = bf.ws.P;

  // The printed tables are written in the flipped curvature orientation;
  // translate the solved coefficients (odd powers of curvature flip) and
  // derive the substitution tables in that same orientation.
  Vector Ld = L;
  Ld[0] = -Ld[0];
  Ld[2] = -Ld[2];
  Ld[3] = -Ld[3];
  Ld[5] = -Ld[5];
  const double L1 = Ld[0], L2 = Ld[1], L3 = Ld[2], L4 = Ld[3], L5 = Ld[4], L6 = Ld[5];

  const IngredientVectors iv = ingredient_vectors(f, Q, q, /*engine=*/false);
  const CoefficientTables tables = derive_tables(iv, Ld, f, P);
  const Matrix& derived_i = tables.base;
  const Matrix& derived_ii = tables.mixed;
  const Matrix& derived_iii = tables.fiber;

  const double np = n - p;  // the printed tables use (n-p) and (p-n)
  const double pn = p - n;

  Matrix printed_i(6, 6);
  printed_i << L1, L2 / 2, L4 / 2, L2 * pn / 2, L4 * np * np / 2, L4 * np / 2,
      L2 / 2, L4, L5 / 2, L4 * pn, L5 * np * np / 2, L5 * np / 2,
      L4 / 2, L5 / 2, L6, L5 * pn / 2, L6 * np * np, L6 * np,
      L2 * pn / 2, L3 * pn, L5 * pn / 2, L3 * np * np, -L5 * np * np * np / 2,
      -L5 * np * np / 2,
      L4 * np * np / 2, L5 * np * np / 2, L6 * np * np, -L5 * np * np * np / 2,
      L6 * np * np * np * np, L6 * np * np * np,
      L4 * np / 2, L5 * np / 2, L6 * np, -L5 * np * np / 2, L6 * np * np * np,
      L6 * np * np;

  Matrix printed_ii(6, 3);
  printed_ii << -L4 * Q * Q / f - L2 * Q - 2 * f * L1, -L2 - 2 * L4 * Q / f, -L4 / f,
      -L5 * Q * Q / f - 2 * L3 * Q - f * L2, -2 * (f * L3 + L5 * Q) / f, -L5 / f,
      -2 * L6 * Q * Q / f - L5 * Q - f * L4, -L5 - 4 * L6 * Q / f, -2 * L6 / f,
      f * (L2 * pn - 1) + L5 * Q * Q * pn / f + 2 * L3 * Q * pn,
      -2 * np * (f * L3 + L5 * Q) / f, L5 * pn / f,
      -np * np * (L4 * f * f + L5 * Q * f + 2 * L6 * Q * Q) / f,
      -np * np * (f * L5 + 4 * L6 * Q) / f, -2 * L6 * np * np / f,
      -np * (L4 * f * f + L5 * Q * f + 2 * L6 * Q * Q) / f,
      -np * (f * L5 + 4 * L6 * Q) / f, 2 * L6 * pn / f;

  Matrix printed_iii(3, 3);
  printed_iii << L6 * std::pow(Q, 4) / (f * f) + L5 * std::pow(Q, 3) / f +
                     (L3 + L4) * Q * Q + f * L2 * Q + f * f * L1 - f * P / 2,
      (L3 + L4) * Q + (L2 * std::pow(f, 3) + 3 * L5 * Q * Q * f + 4 * L6 * std::pow(Q, 3)) /
                          (2 * f * f),
      0.5 * (L4 + Q * (f * L5 + 2 * L6 * Q) / (f * f)),
      (L3 + L4) * Q + (L2 * std::pow(f, 3) + 3 * L5 * Q * Q * f + 4 * L6 * std::pow(Q, 3)) /
                          (2 * f * f),
      L3 + 2 * Q * (f * L5 + 2 * L6 * Q) / (f * f), (f * L5 + 4 * L6 * Q) / (2 * f * f),
      0.5 * (L4 + Q * (f * L5 + 2 * L6 * Q) / (f * f)), (f * L5 + 4 * L6 * Q) / (2 * f * f),
      L6 / (f * f);

  static const char* kBaseNames[] = {"g", "S", "S2", "T", "T2", "S.T"};
  static const char* kFiberNames[] = {"g~", "S~", "S~2"};

  std::vector<std::string> warnings;
  auto compare = [&](const char* table, const Matrix& printed, const Matrix& derived,
                     const char* const* rows, const char* const* cols) {
    for (Eigen::Index r = 0; r < printed.rows(); ++r)
      for (Eigen::Index c = 0; c < printed.cols(); ++c) {
        const double a = printed(r, c), b = derived(r, c);
        if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
          std::ostringstream msg;
          msg << "printed table " << table << " entry (" << rows[r] << ", " << cols[c]
              << "): printed " << a << " vs substitution " << b;
          warnings.push_back(msg.str());
        }
      }
  };
  compare("(i)", printed_i, derived_i, kBaseNames, kBaseNames);
  compare("(ii)", printed_ii, derived_ii, kBaseNames, kFiberNames);
  compare("(iii)", printed_iii, derived_iii, kFiberNames, kFiberNames);
  return warnings;
}

}  // namespace curvscan
