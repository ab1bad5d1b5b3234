#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvscan {

/// Thrown by parse_expr on malformed input. `offset` is the 0-based
/// character position of the failure in the source string.
struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : std::runtime_error(msg), offset(off) {}
};

/// Thrown by evaluate() on a domain failure (log of a non-positive value,
/// division by zero, 0 raised to a negative power, non-finite result).
/// `subexpr` is the rendered offending subexpression.
struct EvalError : std::runtime_error {
  std::string subexpr;
  EvalError(const std::string& msg, std::string sub)
      : std::runtime_error(msg), subexpr(std::move(sub)) {}
};

enum class UnaryOp { Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

using Env = std::map<std::string, double>;

/// Immutable scalar expression tree. Node storage is shared; copies are
/// cheap and instances are safe to evaluate from multiple threads.
class Expr {
 public:
  enum class Kind { Number, Variable, Parameter, Unary, Binary };

  Expr() = default;

  static Expr number(double v);
  static Expr variable(std::string name);
  static Expr parameter(std::string name);
  static Expr unary(UnaryOp op, Expr a);
  static Expr binary(BinaryOp op, Expr a, Expr b);

  bool valid() const { return node_ != nullptr; }

  Kind kind() const;
  double number_value() const;        // Kind::Number only
  const std::string& name() const;    // Variable / Parameter
  UnaryOp unary_op() const;
  BinaryOp binary_op() const;
  Expr child_a() const;               // Unary / Binary
  Expr child_b() const;               // Binary

  /// True when no Variable node occurs in the tree (parameters count as
  /// constants; this is what the power rule keys on).
  bool is_constant() const;
  bool depends_on(const std::string& var) const;
  bool structurally_equal(const Expr& other) const;
  void collect_names(std::vector<std::string>& vars,
                     std::vector<std::string>& params) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;

  friend Expr differentiate(const Expr&, const std::string&);
  friend Expr simplify_basic(const Expr&);
  friend double evaluate(const Expr&, const Env&);
  friend std::string to_string(const Expr&);
};

/// Parse `source` against the expression grammar. Identifiers must resolve
/// to a coordinate, a parameter, or one of the recognized function names
/// (sin cos tan exp log sqrt sinh cosh tanh).
Expr parse_expr(const std::string& source,
                const std::vector<std::string>& coords,
                const std::vector<std::string>& params);

/// Exact partial derivative with respect to coordinate `var`.
/// a^b with non-constant exponent differentiates through a^b = exp(b*log a);
/// constant exponents use the power rule. The result is lightly simplified.
Expr differentiate(const Expr& e, const std::string& var);

/// Constant folding and local identity rules only (x+0, x*1, x*0, x^1, x^0,
/// double negation). Evaluation-preserving at every valid environment.
Expr simplify_basic(const Expr& e);

/// Double-precision evaluation; env must bind every free name.
double evaluate(const Expr& e, const Env& env);

/// Render to a string that re-parses to an evaluation-equivalent Expr.
std::string to_string(const Expr& e);

// Convenience builders (used when composing metrics and oracles in code).
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr pow(Expr base, Expr exponent);
Expr sin(Expr a);
Expr cos(Expr a);
Expr tan(Expr a);
Expr exp(Expr a);
Expr log(Expr a);
Expr sqrt(Expr a);
Expr sinh(Expr a);
Expr cosh(Expr a);
Expr tanh(Expr a);

}  // namespace curvscan
