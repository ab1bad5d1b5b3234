#include "curvscan/tensor.hpp"

#include <cmath>

namespace curvscan {

// ---------------------------------------------------------------------------
// Sym4
// ---------------------------------------------------------------------------

Sym4::Sym4(int n) : n_(n), m_(n * (n - 1) / 2) {
  vals_.assign(static_cast<std::size_t>(m_) * (m_ + 1) / 2, 0.0);
}

int Sym4::pair_index(int i, int j) const {
  // pairs (0,1),(0,2),...,(0,n-1),(1,2),... in lexicographic order
  return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
}

void Sym4::set_class(int p, int q, double v) {
  vals_[static_cast<std::size_t>(p) * (2 * m_ - p - 1) / 2 + q] = v;
}

double Sym4::get_class(int p, int q) const {
  if (p > q) std::swap(p, q);
  return vals_[static_cast<std::size_t>(p) * (2 * m_ - p - 1) / 2 + q];
}

double Sym4::operator()(int i, int j, int k, int l) const {
  if (i == j || k == l) return 0.0;
  double sign = 1.0;
  if (i > j) {
    std::swap(i, j);
    sign = -sign;
  }
  if (k > l) {
    std::swap(k, l);
    sign = -sign;
  }
  return sign * get_class(pair_index(i, j), pair_index(k, l));
}

Sym4 Sym4::from_dense(int n, const std::vector<double>& dense, double tol) {
  auto at = [&](int i, int j, int k, int l) -> double {
    return dense[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l];
  };
  double scale = 0.0;
  for (double v : dense) scale = std::max(scale, std::abs(v));
  const double allowed = 1e-12 + tol * scale;

  Sym4 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          int p = out.pair_index(i, j), q = out.pair_index(k, l);
          if (p > q) continue;
          // average the eight signed symmetry images
          double acc = at(i, j, k, l) - at(j, i, k, l) - at(i, j, l, k) +
                       at(j, i, l, k) + at(k, l, i, j) - at(l, k, i, j) -
                       at(k, l, j, i) + at(l, k, j, i);
          double v = acc / 8.0;
          double worst = 0.0;
          worst = std::max(worst, std::abs(at(i, j, k, l) - v));
          worst = std::max(worst, std::abs(at(j, i, k, l) + v));
          worst = std::max(worst, std::abs(at(i, j, l, k) + v));
          worst = std::max(worst, std::abs(at(k, l, i, j) - v));
          if (worst > allowed)
            throw SymmetryError("curvature symmetry violated: deviation " +
                                std::to_string(worst) + " exceeds tolerance " +
                                std::to_string(allowed));
          out.set_class(p, q, v);
        }
  // components that must vanish identically (repeated antisymmetric index)
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        if (std::abs(at(i, i, k, l)) > allowed || std::abs(at(k, l, i, i)) > allowed)
          throw SymmetryError("nonzero component with repeated antisymmetric index");
  return out;
}

Vector Sym4::vectorize() const {
  Vector v(vals_.size());
  for (std::size_t i = 0; i < vals_.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals_[i];
  return v;
}

double Sym4::max_abs() const {
  double s = 0.0;
  for (double v : vals_) s = std::max(s, std::abs(v));
  return s;
}

double Sym4::bianchi_defect() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          double d = (*this)(i, j, k, l) + (*this)(j, k, i, l) + (*this)(k, i, j, l);
          worst = std::max(worst, std::abs(d));
        }
  return worst;
}

Sym4& Sym4::operator+=(const Sym4& other) {
  for (std::size_t i = 0; i < vals_.size(); ++i) vals_[i] += other.vals_[i];
  return *this;
}
Sym4& Sym4::operator-=(const Sym4& other) {
  for (std::size_t i = 0; i < vals_.size(); ++i) vals_[i] -= other.vals_[i];
  return *this;
}
Sym4& Sym4::operator*=(double s) {
  for (double& v : vals_) v *= s;
  return *this;
}

Sym4 kulkarni_nomizu(const Matrix& A, const Matrix& B) {
  const int n = static_cast<int>(A.rows());
  Sym4 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int p = out.pair_index(i, j);
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          int q = out.pair_index(k, l);
          if (p > q) continue;
          out.set_class(p, q, A(i, l) * B(j, k) + A(j, k) * B(i, l) -
                                  A(i, k) * B(j, l) - A(j, l) * B(i, k));
        }
    }
  return out;
}

Sym4 conformal(const Sym4& R, const Matrix& S, double kappa, const Matrix& g) {
  const int n = R.dim();
  if (n < 3) throw std::invalid_argument("conformal tensor requires dimension >= 3");
  Sym4 c = R;
  c -= (1.0 / (n - 2)) * kulkarni_nomizu(g, S);
  c += (kappa / (2.0 * (n - 1) * (n - 2))) * kulkarni_nomizu(g, g);
  return c;
}

Vector vec_upper(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Vector v(n * (n + 1) / 2);
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) v[idx++] = m(i, j);
  return v;
}

// ---------------------------------------------------------------------------
// CurvatureEngine
// ---------------------------------------------------------------------------

CurvatureEngine::CurvatureEngine(const MetricChart& chart)
    : chart_(chart), n_(chart.dim()) {
  derivs_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    derivs_[i].resize(n_ - i);
    for (int j = i; j < n_; ++j) {
      EntryDerivs& ed = derivs_[i][j - i];
      const Expr& e = chart_.entry(i, j);
      if (!e.valid()) continue;
      ed.value = simplify_basic(e);
      ed.d1.resize(n_);
      ed.d2.resize(n_);
      for (int k = 0; k < n_; ++k) {
        ed.d1[k] = differentiate(ed.value, chart_.coords()[k]);
        ed.d2[k].resize(n_ - k);
        for (int l = k; l < n_; ++l)
          ed.d2[k][l - k] = differentiate(ed.d1[k], chart_.coords()[l]);
      }
    }
  }
}

void CurvatureEngine::metric_at(const PointSample& p, Matrix& g,
                                std::vector<Matrix>& dg,
                                std::vector<std::vector<Matrix>>& d2g) const {
  const Env env = chart_.env_at(p);
  g = Matrix::Zero(n_, n_);
  dg.assign(n_, Matrix::Zero(n_, n_));
  d2g.assign(n_, std::vector<Matrix>(n_, Matrix::Zero(n_, n_)));

  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) {
      const EntryDerivs& ed = derivs_[i][j - i];
      if (!ed.value.valid()) continue;
      const double v = evaluate(ed.value, env);
      g(i, j) = g(j, i) = v;
      for (int k = 0; k < n_; ++k) {
        const double dv = evaluate(ed.d1[k], env);
        dg[k](i, j) = dg[k](j, i) = dv;
        for (int l = k; l < n_; ++l) {
          const double d2v = evaluate(ed.d2[k][l - k], env);
          d2g[k][l](i, j) = d2g[k][l](j, i) = d2v;
          d2g[l][k](i, j) = d2g[l][k](j, i) = d2v;
        }
      }
    }

  const double gmax = g.cwiseAbs().maxCoeff();
  const double det = g.determinant();
  if (std::abs(det) <= 1e-12 * std::pow(gmax, n_))
    throw SingularMetricError("metric is singular at the sample point (|det g| = " +
                              std::to_string(std::abs(det)) + ")");
}

std::vector<Matrix> christoffel(const Matrix& g_inv, const std::vector<Matrix>& dg) {
  const int n = static_cast<int>(g_inv.rows());
  std::vector<Matrix> gamma(n, Matrix::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += g_inv(i, l) * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
        gamma[i](j, k) = gamma[i](k, j) = 0.5 * s;
      }
  return gamma;
}

CurvatureSample CurvatureEngine::sample(const PointSample& p) const {
  CurvatureSample s;
  s.n = n_;
  s.point = p;
  metric_at(p, s.g, s.dg, s.d2g);

  Eigen::PartialPivLU<Matrix> lu(s.g);
  s.g_inv = lu.inverse();

  s.gamma = christoffel(s.g_inv, s.dg);

  // d g^{-1} = -g^{-1} (d g) g^{-1}
  std::vector<Matrix> dginv(n_);
  for (int m = 0; m < n_; ++m) dginv[m] = -s.g_inv * s.dg[m] * s.g_inv;

  s.dgamma.assign(n_, std::vector<Matrix>(n_, Matrix::Zero(n_, n_)));
  for (int m = 0; m < n_; ++m)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = j; k < n_; ++k) {
          double acc = 0.0;
          for (int l = 0; l < n_; ++l) {
            acc += dginv[m](i, l) * (s.dg[j](l, k) + s.dg[k](l, j) - s.dg[l](j, k));
            acc += s.g_inv(i, l) *
                   (s.d2g[m][j](l, k) + s.d2g[m][k](l, j) - s.d2g[m][l](j, k));
          }
          s.dgamma[m][i](j, k) = s.dgamma[m][i](k, j) = 0.5 * acc;
        }

  // R^l_ijk = d_k Gamma^l_ij - d_j Gamma^l_ik
  //           + Gamma^m_ij Gamma^l_mk - Gamma^m_ik Gamma^l_mj,
  // lowered with R_hijk = g_hl R^l_ijk.
  std::vector<double> dense(static_cast<std::size_t>(n_) * n_ * n_ * n_, 0.0);
  {
    std::vector<double> rup(static_cast<std::size_t>(n_) * n_ * n_ * n_, 0.0);
    auto up = [&](int l, int i, int j, int k) -> double& {
      return rup[((static_cast<std::size_t>(l) * n_ + i) * n_ + j) * n_ + k];
    };
    for (int l = 0; l < n_; ++l)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          for (int k = 0; k < n_; ++k) {
            double acc = s.dgamma[k][l](i, j) - s.dgamma[j][l](i, k);
            for (int m = 0; m < n_; ++m)
              acc += s.gamma[m](i, j) * s.gamma[l](m, k) -
                     s.gamma[m](i, k) * s.gamma[l](m, j);
            up(l, i, j, k) = acc;
          }
    auto dn = [&](int h, int i, int j, int k) -> double& {
      return dense[((static_cast<std::size_t>(h) * n_ + i) * n_ + j) * n_ + k];
    };
    for (int h = 0; h < n_; ++h)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          for (int k = 0; k < n_; ++k) {
            double acc = 0.0;
            for (int l = 0; l < n_; ++l) acc += s.g(h, l) * up(l, i, j, k);
            dn(h, i, j, k) = acc;
          }
  }
  s.riemann = Sym4::from_dense(n_, dense, 1e-10);

  // S_jk = g^{il} R_ijkl
  s.ricci = Matrix::Zero(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int k = j; k < n_; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n_; ++i)
        for (int l = 0; l < n_; ++l) acc += s.g_inv(i, l) * s.riemann(i, j, k, l);
      s.ricci(j, k) = s.ricci(k, j) = acc;
    }
  s.kappa = (s.g_inv * s.ricci).trace();

  const Matrix op = s.g_inv * s.ricci;  // Ricci operator (mixed indices)
  s.ricci2 = s.ricci * op;
  s.ricci3 = s.ricci2 * op;
  s.ricci4 = s.ricci3 * op;
  // restore exact symmetry lost to rounding
  s.ricci2 = ((s.ricci2 + s.ricci2.transpose()) / 2).eval();
  s.ricci3 = ((s.ricci3 + s.ricci3.transpose()) / 2).eval();
  s.ricci4 = ((s.ricci4 + s.ricci4.transpose()) / 2).eval();
  s.kappa2 = (s.g_inv * s.ricci2).trace();

  s.gaussian = 0.5 * kulkarni_nomizu(s.g, s.g);
  if (n_ >= 3) s.weyl = conformal(s.riemann, s.ricci, s.kappa, s.g);
  return s;
}

}  // namespace curvscan
