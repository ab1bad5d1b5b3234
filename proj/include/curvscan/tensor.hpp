#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvscan/chart.hpp"

namespace curvscan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SingularMetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SymmetryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Zero-test policy: a tensor vanishes at a point iff
/// max|component| <= abs_tol + rel_tol * scale, with scale the largest
/// curvature component at that point.
struct Tolerances {
  double abs_tol = 1e-12;
  double rel_tol = 1e-8;
  bool is_zero(double value, double scale) const {
    return std::abs(value) <= abs_tol + rel_tol * std::abs(scale);
  }
};

/// (0,4) tensor with the symmetries
///   T_ijkl = -T_jikl = -T_ijlk = T_klij,
/// stored once per index class {(i<j), (k<l), (i,j) <=lex (k,l)}.
/// The canonical component vector enumerates those classes in
/// lexicographic order; first Bianchi is not implied by the storage.
class Sym4 {
 public:
  explicit Sym4(int n);

  /// Reduce a dense array (row-major, size n^4). Checks the symmetries
  /// within `tol` of the largest component and averages over each
  /// symmetry orbit; throws SymmetryError on violation.
  static Sym4 from_dense(int n, const std::vector<double>& dense, double tol = 1e-10);

  int dim() const { return n_; }
  int pair_count() const { return m_; }
  int class_count() const { return m_ * (m_ + 1) / 2; }

  double operator()(int i, int j, int k, int l) const;
  void set_class(int p, int q, double v);  // p, q are pair indices, p <= q
  double get_class(int p, int q) const;

  int pair_index(int i, int j) const;  // requires i < j

  Vector vectorize() const;  // canonical component vector
  double max_abs() const;

  /// max |first Bianchi defect| over all index triples
  double bianchi_defect() const;

  Sym4& operator+=(const Sym4& other);
  Sym4& operator-=(const Sym4& other);
  Sym4& operator*=(double s);
  friend Sym4 operator-(Sym4 a, const Sym4& b) { return a -= b; }
  friend Sym4 operator+(Sym4 a, const Sym4& b) { return a += b; }
  friend Sym4 operator*(double s, Sym4 a) { return a *= s; }

 private:
  int n_;
  int m_;
  std::vector<double> vals_;  // upper triangle over pair indices
};

/// Kulkarni-Nomizu product of two symmetric matrices:
///   (A^B)_ijkl = A_il B_jk + A_jk B_il - A_ik B_jl - A_jl B_ik
Sym4 kulkarni_nomizu(const Matrix& A, const Matrix& B);

/// Conformal curvature tensor
///   C = R - 1/(n-2) g^S + kappa/(2(n-1)(n-2)) g^g;  requires n >= 3.
Sym4 conformal(const Sym4& R, const Matrix& S, double kappa, const Matrix& g);

/// Everything evaluated at one chart point.
struct CurvatureSample {
  int n = 0;
  PointSample point;
  Matrix g, g_inv;
  std::vector<Matrix> dg;                // dg[k](i,j) = d_k g_ij
  std::vector<std::vector<Matrix>> d2g;  // d2g[k][l] = d_k d_l g
  std::vector<Matrix> gamma;             // gamma[i](j,k) = Gamma^i_jk
  std::vector<std::vector<Matrix>> dgamma;  // dgamma[m][i](j,k) = d_m Gamma^i_jk
  Sym4 riemann;                          // R_ijkl
  Matrix ricci, ricci2, ricci3, ricci4;  // S, S^2, S^3, S^4
  double kappa = 0.0;                    // g^{jk} S_jk
  double kappa2 = 0.0;                   // tr(S^2)
  Sym4 gaussian;                         // G = (g^g)/2
  std::optional<Sym4> weyl;              // C, absent for n < 3

  CurvatureSample() : riemann(1), gaussian(1) {}
};

/// Computes curvature bundles for one chart. The constructor differentiates
/// all metric entries symbolically once; evaluation at distinct points is
/// independent and thread-safe.
class CurvatureEngine {
 public:
  explicit CurvatureEngine(const MetricChart& chart);

  const MetricChart& chart() const { return chart_; }

  /// Numeric g, dg, d2g at a point. Rejects metrics with
  /// |det g| <= 1e-12 * (max|g_ij|)^n.
  void metric_at(const PointSample& p, Matrix& g, std::vector<Matrix>& dg,
                 std::vector<std::vector<Matrix>>& d2g) const;

  CurvatureSample sample(const PointSample& p) const;

 private:
  MetricChart chart_;
  int n_;
  // per upper-triangle entry: value, first and second derivatives
  struct EntryDerivs {
    Expr value;
    std::vector<Expr> d1;               // by coordinate
    std::vector<std::vector<Expr>> d2;  // d2[k][l], k <= l
  };
  std::vector<std::vector<EntryDerivs>> derivs_;
};

/// Christoffel symbols of the second kind from g and dg:
///   Gamma^i_jk = 1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk)
std::vector<Matrix> christoffel(const Matrix& g_inv, const std::vector<Matrix>& dg);

/// Upper-triangle vectorization of a symmetric matrix (row-major i <= j).
Vector vec_upper(const Matrix& m);

}  // namespace curvscan
