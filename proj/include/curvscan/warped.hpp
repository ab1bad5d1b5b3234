#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "curvscan/classify.hpp"

namespace curvscan {

/// Base chart, fiber chart and a positive warping expression over the base
/// coordinates. Parameter bindings are shared between the factors.
struct WarpedSpec {
  MetricChart base;
  MetricChart fiber;
  Expr warp;
  std::string warp_text;

  WarpedSpec(MetricChart base_, MetricChart fiber_, const std::string& warp_source);

  int p() const { return base.dim(); }
  int q() const { return fiber.dim(); }
  int n() const { return base.dim() + fiber.dim(); }

  /// Block metric: base entries, warp * fiber entries, zero mixed block.
  MetricChart assemble() const;

  /// Parse the warp-spec format:
  ///   base  <path>
  ///   fiber <path>
  ///   warp : <expression over base coordinates>
  /// Relative paths resolve against `dir`.
  static WarpedSpec load(const std::string& path);
  static WarpedSpec from_string(const std::string& text, const std::string& dir);
  std::string to_file_string(const std::string& base_path,
                             const std::string& fiber_path) const;
};

/// Warping auxiliaries and the base curvature bundle at one base point:
///   T_ab = -1/(2f) (nabla_b f_a - 1/(2f) f_a f_b)
///   P    = 1/(4 f^2) g^{ab} f_a f_b
///   Q    = f ((n-p-1) P - tr T)
struct WarpScalars {
  double f = 0.0;
  Vector df;          // f_a
  Matrix hess;        // nabla_b f_a
  Matrix T;
  double tr_T = 0.0;
  double P = 0.0;
  double Q = 0.0;
  Matrix T2;          // T_ac gbar^{cd} T_db
  Matrix S_dot_T;     // gbar^{cd} Sbar_ac T_db, symmetrized
  double s_dot_t_asym = 0.0;  // size of the antisymmetric part removed
  double tr_T2 = 0.0;
  double tr_S_dot_T = 0.0;
  CurvatureSample base_bundle;
};

/// A (0,4) tensor with curvature symmetries on a warped chart, stored as
/// base block, mixed block M(a,alpha,b,beta) and fiber block.
struct BlockTensor4 {
  int p = 0, q = 0;
  Sym4 base;
  std::vector<double> mixed;  // dense, index ((a*q+al)*p+b)*q+be
  Sym4 fiber;

  BlockTensor4(int p_, int q_) : p(p_), q(q_), base(p_), fiber(q_) {
    mixed.assign(static_cast<std::size_t>(p) * q * p * q, 0.0);
  }
  double& m(int a, int al, int b, int be) {
    return mixed[((static_cast<std::size_t>(a) * q + al) * p + b) * q + be];
  }
  double m(int a, int al, int b, int be) const {
    return mixed[((static_cast<std::size_t>(a) * q + al) * p + b) * q + be];
  }
  /// Expand to a full (0,4) tensor on the product chart.
  Sym4 to_full() const;
};

struct BlockResiduals {
  double base = 0.0;
  double mixed = 0.0;
  double fiber = 0.0;
  double worst() const { return std::max({base, mixed, fiber}); }
};

struct CorollaryScalars {
  double J1 = 0.0;  // coefficient of fiber S^2 in the gbar-trace of the mixed identity
  double J2 = 0.0;  // coefficient of fiber S
  double J3 = 0.0;  // coefficient of fiber g
  double cflat_coeff = 0.0;  // S~^S~ coefficient left after eliminating S~^2
  bool fiber_roter = false;
  bool fiber_constant_curvature = false;
  bool fiber_conformally_flat = false;
};

struct AssemblyReport {
  std::string input;
  ClassifyConfig config;
  std::vector<std::pair<std::string, double>> formula_deviations;
  double max_abs_T = 0.0, max_abs_P = 0.0, max_abs_Q = 0.0;
  std::vector<BlockResiduals> grt_block_checks;  // with classify() coefficients
  std::vector<std::string> table_cross_check_warnings;
  ClassificationReport classification;
  std::vector<std::string> warnings;

  double worst_deviation() const {
    double w = 0.0;
    for (const auto& [_, d] : formula_deviations) w = std::max(w, d);
    return w;
  }
};

/// Predictions from the blockwise warped-product formulas, verified against
/// direct computation on the assembled chart.
class WarpedAnalyzer {
 public:
  explicit WarpedAnalyzer(const WarpedSpec& spec);

  const WarpedSpec& spec() const { return spec_; }
  const MetricChart& assembled() const { return assembled_; }
  const CurvatureEngine& assembled_engine() const { return full_engine_; }

  PointSample base_point(const PointSample& full) const;
  PointSample fiber_point(const PointSample& full) const;

  WarpScalars warp_scalars(const PointSample& base_pt) const;

  /// Blockwise Riemann tensor:
  ///   R_abcd = Rbar,  R_{a al b be} = f T_ab g~,  R_fiber = f R~ - f^2 P G~.
  BlockTensor4 predicted_riemann(const PointSample& full) const;

  /// Blockwise S, kappa, S^2:
  ///   S_ab = Sbar - (n-p) T,  S_{al be} = S~ + Q g~,
  ///   kappa = kbar + k~/f - (n-p)((n-p-1)P - 2 trT),
  ///   S2_ab = Sbar2 + (n-p) Sbar.T + (n-p)^2 T^2,
  ///   S2_{al be} = (S~2 + 2Q S~ + Q^2 g~)/f.
  struct RicciBlocks {
    Matrix S_base, S_fiber;
    double kappa = 0.0;
    Matrix S2_base, S2_fiber;
    Matrix full_S(int p, int q) const;
    Matrix full_S2(int p, int q) const;
  };
  RicciBlocks predicted_ricci_scalar(const PointSample& full) const;

  /// The six wedge products g^g, g^S, S^S, g^S2, S^S2, S2^S2 built from the
  /// blockwise forms of g, S and S^2.
  std::array<BlockTensor4, 6> predicted_wedges(const PointSample& full) const;

  /// Residuals of the three block equations of
  ///   R = L1 g^g + L2 g^S + L3 S^S + L4 g^S2 + L5 S^S2 + L6 S2^S2,
  /// obtained by direct substitution of the blockwise forms.
  BlockResiduals check_grt_blocks(const Vector& L6coeffs, const PointSample& full) const;
  /// Same with the three-term form R = N1 g^g + N2 g^S + N3 S^S.
  BlockResiduals check_rt_blocks(const Vector& N3coeffs, const PointSample& full) const;

  /// Blockwise conformal-flatness identities: the three-term residuals at
  /// N = (-kappa/(2(n-1)(n-2)), 1/(n-2), 0) with the predicted kappa.
  BlockResiduals check_cflat_warp(const PointSample& full) const;

  /// J1/J2 scalars from the gbar-trace of the mixed block identity, plus
  /// the fiber-structure predicates they imply.
  CorollaryScalars corollary_scalars(const PointSample& full, const Vector& L6coeffs,
                                     const Tolerances& tol) const;

  /// Compare direct curvature of the assembled chart against every
  /// blockwise prediction at seeded points.
  AssemblyReport verify_assembly(const ClassifyConfig& config,
                                 bool with_classification = true) const;

  /// Evaluate the printed coefficient tables of the blockwise
  /// characterization against the substitution-derived ones; one warning
  /// per mismatching entry.
  std::vector<std::string> table_cross_check(const Vector& L6coeffs,
                                             const PointSample& full) const;

  /// Evaluate the warp at `count` seeded base points and fail when it is
  /// not strictly positive everywhere.
  void validate_warp(int count, std::uint64_t seed) const;

  /// Deviations between a predicted bundle and a direct sample, keyed by
  /// formula name (exposed for harness self-tests).
  std::vector<std::pair<std::string, double>> compare_at(
      const CurvatureSample& direct, const BlockTensor4& pred_R,
      const RicciBlocks& pred_ricci, const std::array<BlockTensor4, 6>& pred_w) const;

 private:
  WarpedSpec spec_;
  MetricChart assembled_;
  CurvatureEngine base_engine_;
  CurvatureEngine fiber_engine_;
  CurvatureEngine full_engine_;
  std::vector<Expr> dwarp_;
  std::vector<std::vector<Expr>> d2warp_;

  struct BlockForms {
    // coordinates of g, S, S2 blocks in the base/fiber ingredient bases
    WarpScalars ws;
    CurvatureSample fiber_bundle;
    Matrix gB, SB, S2B;  // base blocks of g, S, S2
    Matrix gF, SF, S2F;  // fiber blocks
  };
  BlockForms block_forms(const PointSample& full) const;
  BlockTensor4 wedge_blocks(const Matrix& Ab, const Matrix& Af, const Matrix& Bb,
                            const Matrix& Bf) const;
  BlockResiduals residuals_against(const BlockTensor4& target,
                                   const std::vector<BlockTensor4>& basis,
                                   const Vector& coeffs) const;
};

}  // namespace curvscan
