#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvscan/expr.hpp"

namespace curvscan {

/// Malformed chart or warp-spec file. `line` is 1-based (0 when unknown).
struct ChartError : std::runtime_error {
  int line;
  ChartError(const std::string& msg, int line_ = 0)
      : std::runtime_error(msg), line(line_) {}
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// A point given by one value per chart coordinate, in coordinate order.
struct PointSample {
  std::vector<double> values;
};

/// An n-dimensional coordinate chart with symmetric Expr metric entries,
/// named parameter bindings and a per-coordinate sampling box.
/// Immutable once built; safe to share across threads.
class MetricChart {
 public:
  MetricChart(std::vector<std::string> coords,
              std::vector<std::vector<Expr>> upper_entries,
              std::map<std::string, double> params,
              std::vector<Interval> domain);

  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<std::string>& coords() const { return coords_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::vector<Interval>& domain() const { return domain_; }

  /// Entry g_ij; invalid Expr means a structural zero. i, j are 0-based.
  const Expr& entry(int i, int j) const;
  bool has_entry(int i, int j) const { return entry(i, j).valid(); }

  int coord_index(const std::string& name) const;  // -1 when absent

  /// Environment binding parameters plus the coordinates of `p`.
  Env env_at(const PointSample& p) const;

  /// Chart with every metric entry multiplied by `factor` (domain,
  /// parameters unchanged).
  MetricChart scaled(double factor) const;

  /// Parse the line-oriented chart format ('#' starts a comment).
  static MetricChart from_string(const std::string& text);
  static MetricChart load(const std::string& path);

  /// Render in the same file format (round-trips through from_string).
  std::string to_file_string() const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> coords_;
  // upper triangle, entries_[i][j-i] for i <= j
  std::vector<std::vector<Expr>> entries_;
  std::map<std::string, double> params_;
  std::vector<Interval> domain_;
};

}  // namespace curvscan
