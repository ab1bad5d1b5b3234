#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "curvscan/tensor.hpp"

namespace curvscan {

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Flag { Pass, Fail, Indeterminate };
const char* flag_name(Flag f);

struct ClassifyConfig {
  int points = 25;
  std::uint64_t seed = 42;
  Tolerances tol;
  std::string input_label = "<chart>";
};

/// Relative singular-value cutoff used for every rank decision.
inline constexpr double kRankThreshold = 1e-9;

/// Minimum-norm least-squares solution of target ~ sum_i c_i basis_i.
struct DependenceVerdict {
  Vector coeffs;
  double residual = 0.0;       // relative, or absolute when target_norm < abs_tol
  bool residual_absolute = false;
  double target_norm = 0.0;
  int basis_rank = 0;
  std::vector<double> singular_values;
  bool degenerate_basis = false;

  bool passes(const Tolerances& tol) const {
    return residual_absolute ? residual <= tol.abs_tol : residual < tol.rel_tol;
  }
};

DependenceVerdict solve_span(const Vector& target, const std::vector<Vector>& basis,
                             const Tolerances& tol);

/// R against span{g^g, g^S, S^S}; coefficients are (N1, N2, N3).
DependenceVerdict solve_roter(const CurvatureSample& s, const Tolerances& tol);

/// R against span{g^g, g^S, S^S, g^S2, S^S2, S2^S2}; coefficients (L1..L6).
DependenceVerdict solve_grt(const CurvatureSample& s, const Tolerances& tol);

/// Residual of R - kappa/(n(n-1)) G against the zero-test policy.
struct ZeroCheck {
  bool pass = false;
  double max_abs = 0.0;  // largest violating component
  double scale = 0.0;    // curvature scale used by the policy
};
ZeroCheck check_flat(const CurvatureSample& s, const Tolerances& tol);
ZeroCheck check_constant_curvature(const CurvatureSample& s, const Tolerances& tol);
/// Zero-test on the conformal tensor. Determinate for n >= 4 only
/// (C vanishes identically in dimension 3).
struct ConformalCheck {
  Flag flag = Flag::Indeterminate;
  double max_abs = 0.0;
  double scale = 0.0;
};
ConformalCheck check_conformally_flat(const CurvatureSample& s, const Tolerances& tol);

/// Rank of the stacked column matrix {vec g, vec S, ..., vec S^level};
/// Ein(level) holds iff rank < level + 1.
int ein_rank(const CurvatureSample& s, int level);
bool check_ein(const CurvatureSample& s, int level);

/// True when the solved coefficients sit on the exception locus of the
/// Ein implication (conformally-flat values for the 3-term solve, the
/// L4-family for the 6-term solve). Informational only.
bool exceptional_locus_roter(const DependenceVerdict& v, const CurvatureSample& s,
                             const Tolerances& tol);
bool exceptional_locus_grt(const DependenceVerdict& v, const CurvatureSample& s,
                           const Tolerances& tol);

struct PointVerdicts {
  PointSample point;
  double kappa = 0.0;
  ZeroCheck flat;
  ZeroCheck constant_curvature;
  ConformalCheck conformally_flat;
  DependenceVerdict roter;
  DependenceVerdict grt;
  std::array<int, 4> ein_ranks{};
  std::array<bool, 4> ein{};
  bool roter_exceptional = false;
  bool grt_exceptional = false;
};

struct ClassificationReport {
  std::string input;
  ClassifyConfig config;
  int n = 0;
  std::vector<std::string> coord_names;
  Flag flat = Flag::Indeterminate;
  Flag constant_curvature = Flag::Indeterminate;
  Flag conformally_flat = Flag::Indeterminate;
  Flag roter = Flag::Indeterminate;
  Flag grt = Flag::Indeterminate;
  int ein_level = 0;  // 0 = none
  std::vector<PointVerdicts> per_point;
  std::vector<std::string> special_vanishing;
  bool roter_exceptional = false;
  bool grt_exceptional = false;
  std::vector<std::string> warnings;

  Flag flag(const std::string& name) const;
};

/// Draw `count` points from the chart's domain box with the seeded
/// generator (mt19937_64), rejecting points that fail evaluation or the
/// det-g floor; at most 100 retries per point.
std::vector<CurvatureSample> draw_samples(const CurvatureEngine& engine, int count,
                                          std::uint64_t seed);

/// Full structure classification: every flag passes only when its
/// pointwise condition holds at every accepted point. The verdicts are
/// sampled certificates, not proofs; seed and point count are echoed in
/// the report.
ClassificationReport classify(const MetricChart& chart, const ClassifyConfig& config);

}  // namespace curvscan
