#include "curvscan/chart.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace curvscan {

MetricChart::MetricChart(std::vector<std::string> coords,
                         std::vector<std::vector<Expr>> upper_entries,
                         std::map<std::string, double> params,
                         std::vector<Interval> domain)
    : coords_(std::move(coords)),
      entries_(std::move(upper_entries)),
      params_(std::move(params)),
      domain_(std::move(domain)) {
  const std::size_t n = coords_.size();
  if (n == 0) throw ChartError("chart needs at least one coordinate");
  if (entries_.size() != n) throw ChartError("entry rows do not match dimension");
  for (std::size_t i = 0; i < n; ++i)
    if (entries_[i].size() != n - i)
      throw ChartError("entry row " + std::to_string(i + 1) + " has wrong length");
  if (domain_.size() != n)
    throw ChartError("every coordinate needs a domain interval");
  for (std::size_t i = 0; i < n; ++i)
    if (!(domain_[i].lo <= domain_[i].hi))
      throw ChartError("empty domain interval for coordinate " + coords_[i]);
}

const Expr& MetricChart::entry(int i, int j) const {
  if (i > j) std::swap(i, j);
  return entries_[i][j - i];
}

int MetricChart::coord_index(const std::string& name) const {
  auto it = std::find(coords_.begin(), coords_.end(), name);
  return it == coords_.end() ? -1 : static_cast<int>(it - coords_.begin());
}

Env MetricChart::env_at(const PointSample& p) const {
  Env env(params_.begin(), params_.end());
  for (std::size_t i = 0; i < coords_.size(); ++i) env[coords_[i]] = p.values[i];
  return env;
}

MetricChart MetricChart::scaled(double factor) const {
  std::vector<std::vector<Expr>> scaled_entries(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    scaled_entries[i].resize(entries_[i].size());
    for (std::size_t k = 0; k < entries_[i].size(); ++k)
      if (entries_[i][k].valid())
        scaled_entries[i][k] = Expr::number(factor) * entries_[i][k];
  }
  return MetricChart(coords_, std::move(scaled_entries), params_, domain_);
}

// ---------------------------------------------------------------------------
// File format
//
//   dim 5
//   coords x1 x2 x3 x4 x5
//   param c1 = 1.0
//   domain x1 0.5 1.5
//   g 1 1 : 1
//   g 3 3 : c2 * cos(x2 - 2*c1)^2
//
// Unlisted entries are zero; indices are 1-based; '#' starts a comment.
// ---------------------------------------------------------------------------

namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool reserved_name(const std::string& s) {
  static const char* kReserved[] = {"sin",  "cos",  "tan",  "exp", "log",
                                    "sqrt", "sinh", "cosh", "tanh"};
  for (const char* r : kReserved)
    if (s == r) return true;
  return false;
}

}  // namespace

MetricChart MetricChart::from_string(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  int dim = -1;
  std::vector<std::string> coords;
  std::map<std::string, double> params;
  std::vector<std::string> param_names;
  std::map<std::string, Interval> domains;
  struct PendingEntry {
    int i, j, line;
    std::string text;
  };
  std::vector<PendingEntry> pending;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    line = strip(line);
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "dim") {
      if (!(ls >> dim) || dim < 1)
        throw ChartError("invalid dimension at line " + std::to_string(lineno), lineno);
    } else if (kw == "coords") {
      std::string c;
      while (ls >> c) {
        if (reserved_name(c))
          throw ChartError("coordinate name '" + c + "' is reserved at line " +
                               std::to_string(lineno),
                           lineno);
        if (std::find(coords.begin(), coords.end(), c) != coords.end())
          throw ChartError("duplicate coordinate '" + c + "' at line " +
                               std::to_string(lineno),
                           lineno);
        coords.push_back(c);
      }
    } else if (kw == "param") {
      std::string name, eq;
      double v;
      if (!(ls >> name >> eq >> v) || eq != "=")
        throw ChartError("malformed param line at line " + std::to_string(lineno), lineno);
      if (reserved_name(name))
        throw ChartError("parameter name '" + name + "' is reserved at line " +
                             std::to_string(lineno),
                         lineno);
      params[name] = v;
      param_names.push_back(name);
    } else if (kw == "domain") {
      std::string name;
      double lo, hi;
      if (!(ls >> name >> lo >> hi))
        throw ChartError("malformed domain line at line " + std::to_string(lineno), lineno);
      domains[name] = Interval{lo, hi};
    } else if (kw == "g") {
      int i, j;
      std::string colon;
      if (!(ls >> i >> j >> colon) || colon != ":")
        throw ChartError("malformed g line at line " + std::to_string(lineno), lineno);
      std::string expr_text;
      std::getline(ls, expr_text);
      expr_text = strip(expr_text);
      if (expr_text.empty())
        throw ChartError("missing expression at line " + std::to_string(lineno), lineno);
      pending.push_back({i, j, lineno, expr_text});
    } else {
      throw ChartError("unknown keyword '" + kw + "' at line " + std::to_string(lineno),
                       lineno);
    }
  }

  if (dim < 1) throw ChartError("missing 'dim' line");
  if (static_cast<int>(coords.size()) != dim)
    throw ChartError("coords count does not match dim");

  std::vector<Interval> domain(dim);
  for (int i = 0; i < dim; ++i) {
    auto it = domains.find(coords[i]);
    if (it == domains.end())
      throw ChartError("missing domain for coordinate " + coords[i]);
    domain[i] = it->second;
  }

  std::vector<std::vector<Expr>> entries(dim);
  for (int i = 0; i < dim; ++i) entries[i].resize(dim - i);

  for (const auto& pe : pending) {
    if (pe.i < 1 || pe.i > dim || pe.j < 1 || pe.j > dim)
      throw ChartError("g index out of range at line " + std::to_string(pe.line), pe.line);
    Expr e;
    try {
      e = parse_expr(pe.text, coords, param_names);
    } catch (const ParseError& pe2) {
      throw ChartError(std::string(pe2.what()) + " at line " + std::to_string(pe.line),
                       pe.line);
    }
    int i = pe.i - 1, j = pe.j - 1;
    if (i > j) std::swap(i, j);
    Expr& slot = entries[i][j - i];
    if (slot.valid()) {
      if (!slot.structurally_equal(e))
        throw ChartError("conflicting expressions for g " + std::to_string(pe.i) + " " +
                             std::to_string(pe.j) + " at line " + std::to_string(pe.line),
                         pe.line);
    } else {
      slot = e;
    }
  }

  return MetricChart(std::move(coords), std::move(entries), std::move(params),
                     std::move(domain));
}

MetricChart MetricChart::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ChartError("cannot open chart file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return from_string(ss.str());
  } catch (ChartError& e) {
    throw ChartError(path + ": " + e.what(), e.line);
  }
}

namespace {
std::string fmt_double_file(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}
}  // namespace

std::string MetricChart::to_file_string() const {
  std::ostringstream out;
  out << "dim " << dim() << "\n";
  out << "coords";
  for (const auto& c : coords_) out << " " << c;
  out << "\n";
  for (const auto& [name, value] : params_)
    out << "param " << name << " = " << fmt_double_file(value) << "\n";
  for (int i = 0; i < dim(); ++i)
    out << "domain " << coords_[i] << " " << fmt_double_file(domain_[i].lo) << " "
        << fmt_double_file(domain_[i].hi) << "\n";
  for (int i = 0; i < dim(); ++i)
    for (int j = i; j < dim(); ++j)
      if (has_entry(i, j))
        out << "g " << (i + 1) << " " << (j + 1) << " : " << to_string(entry(i, j))
            << "\n";
  return out.str();
}

void MetricChart::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ChartError("cannot write chart file: " + path);
  out << to_file_string();
}

}  // namespace curvscan
