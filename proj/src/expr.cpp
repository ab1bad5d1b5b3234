#include "curvscan/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace curvscan {

struct Expr::Node {
  Kind kind;
  double number = 0.0;
  std::string name;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  std::shared_ptr<const Node> a, b;
};

Expr Expr::number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->number = v;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Parameter;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, Expr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->uop = op;
  n->a = a.node_;
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr a, Expr b) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->bop = op;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->number; }
const std::string& Expr::name() const { return node_->name; }
UnaryOp Expr::unary_op() const { return node_->uop; }
BinaryOp Expr::binary_op() const { return node_->bop; }
Expr Expr::child_a() const { return Expr(node_->a); }
Expr Expr::child_b() const { return Expr(node_->b); }

bool Expr::is_constant() const {
  switch (node_->kind) {
    case Kind::Number:
    case Kind::Parameter:
      return true;
    case Kind::Variable:
      return false;
    case Kind::Unary:
      return child_a().is_constant();
    case Kind::Binary:
      return child_a().is_constant() && child_b().is_constant();
  }
  return false;
}

bool Expr::depends_on(const std::string& var) const {
  switch (node_->kind) {
    case Kind::Number:
    case Kind::Parameter:
      return false;
    case Kind::Variable:
      return node_->name == var;
    case Kind::Unary:
      return child_a().depends_on(var);
    case Kind::Binary:
      return child_a().depends_on(var) || child_b().depends_on(var);
  }
  return false;
}

bool Expr::structurally_equal(const Expr& other) const {
  if (node_ == other.node_) return true;
  if (!node_ || !other.node_) return false;
  if (node_->kind != other.node_->kind) return false;
  switch (node_->kind) {
    case Kind::Number:
      return node_->number == other.node_->number;
    case Kind::Variable:
    case Kind::Parameter:
      return node_->name == other.node_->name;
    case Kind::Unary:
      return node_->uop == other.node_->uop &&
             child_a().structurally_equal(other.child_a());
    case Kind::Binary:
      return node_->bop == other.node_->bop &&
             child_a().structurally_equal(other.child_a()) &&
             child_b().structurally_equal(other.child_b());
  }
  return false;
}

void Expr::collect_names(std::vector<std::string>& vars,
                         std::vector<std::string>& params) const {
  switch (node_->kind) {
    case Kind::Number:
      return;
    case Kind::Variable:
      if (std::find(vars.begin(), vars.end(), node_->name) == vars.end())
        vars.push_back(node_->name);
      return;
    case Kind::Parameter:
      if (std::find(params.begin(), params.end(), node_->name) == params.end())
        params.push_back(node_->name);
      return;
    case Kind::Unary:
      child_a().collect_names(vars, params);
      return;
    case Kind::Binary:
      child_a().collect_names(vars, params);
      child_b().collect_names(vars, params);
      return;
  }
}

Expr operator+(Expr a, Expr b) { return Expr::binary(BinaryOp::Add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return Expr::binary(BinaryOp::Sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::binary(BinaryOp::Mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::binary(BinaryOp::Div, std::move(a), std::move(b)); }
Expr operator-(Expr a) { return Expr::unary(UnaryOp::Neg, std::move(a)); }
Expr pow(Expr base, Expr exponent) { return Expr::binary(BinaryOp::Pow, std::move(base), std::move(exponent)); }
Expr sin(Expr a) { return Expr::unary(UnaryOp::Sin, std::move(a)); }
Expr cos(Expr a) { return Expr::unary(UnaryOp::Cos, std::move(a)); }
Expr tan(Expr a) { return Expr::unary(UnaryOp::Tan, std::move(a)); }
Expr exp(Expr a) { return Expr::unary(UnaryOp::Exp, std::move(a)); }
Expr log(Expr a) { return Expr::unary(UnaryOp::Log, std::move(a)); }
Expr sqrt(Expr a) { return Expr::unary(UnaryOp::Sqrt, std::move(a)); }
Expr sinh(Expr a) { return Expr::unary(UnaryOp::Sinh, std::move(a)); }
Expr cosh(Expr a) { return Expr::unary(UnaryOp::Cosh, std::move(a)); }
Expr tanh(Expr a) { return Expr::unary(UnaryOp::Tanh, std::move(a)); }

// ---------------------------------------------------------------------------
// Parser
//
//   expr   := term { ("+" | "-") term }
//   term   := factor { ("*" | "/") factor }
//   factor := ["-"] base [ "^" factor ]          (^ right-assoc, binds the
//   base   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"    unary -)
// ---------------------------------------------------------------------------

namespace {

struct FunctionName {
  const char* name;
  UnaryOp op;
};
constexpr FunctionName kFunctions[] = {
    {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},
    {"exp", UnaryOp::Exp},   {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt},
    {"sinh", UnaryOp::Sinh}, {"cosh", UnaryOp::Cosh}, {"tanh", UnaryOp::Tanh},
};

class Parser {
 public:
  Parser(const std::string& src, const std::vector<std::string>& coords,
         const std::vector<std::string>& params)
      : src_(src), coords_(coords), params_(params) {}

  Expr run() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty input", pos_);
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) {
      if (src_[pos_] == ')')
        throw ParseError("unbalanced parentheses", pos_);
      throw ParseError(std::string("unexpected character '") + src_[pos_] + "'",
                       pos_);
    }
    return e;
  }

 private:
  const std::string& src_;
  const std::vector<std::string>& coords_;
  const std::vector<std::string>& params_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept('+'))
        e = e + parse_term();
      else if (accept('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    for (;;) {
      if (accept('*'))
        e = e * parse_factor();
      else if (accept('/'))
        e = e / parse_factor();
      else
        return e;
    }
  }

  Expr parse_factor() {
    bool neg = accept('-');
    Expr base = parse_base();
    if (accept('^')) base = pow(std::move(base), parse_factor());
    return neg ? -std::move(base) : base;
  }

  Expr parse_base() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (c == '(') {
      std::size_t open = pos_;
      ++pos_;
      Expr e = parse_expr();
      if (!accept(')')) throw ParseError("unbalanced parentheses", std::min(pos_, src_.size()));
      (void)open;
      return e;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
        throw ParseError("malformed number: digits required after '.'", pos_);
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
        throw ParseError("malformed number: exponent digits required", mark);
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    return Expr::number(std::stod(src_.substr(start, pos_ - start)));
  }

  Expr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (peek('(')) {
      for (const auto& f : kFunctions) {
        if (name == f.name) {
          ++pos_;  // '('
          Expr arg = parse_expr();
          if (!accept(')'))
            throw ParseError("unbalanced parentheses", std::min(pos_, src_.size()));
          return Expr::unary(f.op, std::move(arg));
        }
      }
      throw ParseError("unknown function '" + name + "'", start);
    }
    if (std::find(coords_.begin(), coords_.end(), name) != coords_.end())
      return Expr::variable(name);
    if (std::find(params_.begin(), params_.end(), name) != params_.end())
      return Expr::parameter(name);
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

}  // namespace

Expr parse_expr(const std::string& source, const std::vector<std::string>& coords,
                const std::vector<std::string>& params) {
  return Parser(source, coords, params).run();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double evaluate(const Expr& e, const Env& env) {
  auto fault = [&](const std::string& msg) -> double {
    throw EvalError(msg, to_string(e));
  };
  switch (e.kind()) {
    case Expr::Kind::Number:
      return e.number_value();
    case Expr::Kind::Variable:
    case Expr::Kind::Parameter: {
      auto it = env.find(e.name());
      if (it == env.end()) return fault("unbound identifier '" + e.name() + "'");
      return it->second;
    }
    case Expr::Kind::Unary: {
      double a = evaluate(e.child_a(), env);
      double r = 0;
      switch (e.unary_op()) {
        case UnaryOp::Neg: r = -a; break;
        case UnaryOp::Sin: r = std::sin(a); break;
        case UnaryOp::Cos: r = std::cos(a); break;
        case UnaryOp::Tan: r = std::tan(a); break;
        case UnaryOp::Exp: r = std::exp(a); break;
        case UnaryOp::Log:
          if (a <= 0.0) return fault("log of non-positive argument");
          r = std::log(a);
          break;
        case UnaryOp::Sqrt:
          if (a < 0.0) return fault("sqrt of negative argument");
          r = std::sqrt(a);
          break;
        case UnaryOp::Sinh: r = std::sinh(a); break;
        case UnaryOp::Cosh: r = std::cosh(a); break;
        case UnaryOp::Tanh: r = std::tanh(a); break;
      }
      if (!std::isfinite(r)) return fault("non-finite result");
      return r;
    }
    case Expr::Kind::Binary: {
      double a = evaluate(e.child_a(), env);
      double b = evaluate(e.child_b(), env);
      double r = 0;
      switch (e.binary_op()) {
        case BinaryOp::Add: r = a + b; break;
        case BinaryOp::Sub: r = a - b; break;
        case BinaryOp::Mul: r = a * b; break;
        case BinaryOp::Div:
          if (b == 0.0) return fault("division by zero");
          r = a / b;
          break;
        case BinaryOp::Pow:
          if (a == 0.0 && b < 0.0) return fault("0 raised to negative power");
          r = std::pow(a, b);
          break;
      }
      if (!std::isfinite(r)) return fault("non-finite result");
      return r;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// simplify_basic
// ---------------------------------------------------------------------------

namespace {

bool is_num(const Expr& e, double v) {
  return e.kind() == Expr::Kind::Number && e.number_value() == v;
}

}  // namespace

Expr simplify_basic(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number:
    case Expr::Kind::Variable:
    case Expr::Kind::Parameter:
      return e;
    case Expr::Kind::Unary: {
      Expr a = simplify_basic(e.child_a());
      if (e.unary_op() == UnaryOp::Neg) {
        if (a.kind() == Expr::Kind::Unary && a.unary_op() == UnaryOp::Neg)
          return a.child_a();  // double negation
        if (a.kind() == Expr::Kind::Number) return Expr::number(-a.number_value());
      }
      if (a.kind() == Expr::Kind::Number) {
        // fold when evaluation cannot fault
        Expr folded = Expr::unary(e.unary_op(), a);
        try {
          return Expr::number(evaluate(folded, {}));
        } catch (const EvalError&) {
          return folded;
        }
      }
      return Expr::unary(e.unary_op(), std::move(a));
    }
    case Expr::Kind::Binary: {
      Expr a = simplify_basic(e.child_a());
      Expr b = simplify_basic(e.child_b());
      const bool an = a.kind() == Expr::Kind::Number;
      const bool bn = b.kind() == Expr::Kind::Number;
      switch (e.binary_op()) {
        case BinaryOp::Add:
          if (is_num(a, 0)) return b;
          if (is_num(b, 0)) return a;
          break;
        case BinaryOp::Sub:
          if (is_num(b, 0)) return a;
          if (is_num(a, 0)) return simplify_basic(-b);
          break;
        case BinaryOp::Mul:
          if (is_num(a, 0) || is_num(b, 0)) return Expr::number(0);
          if (is_num(a, 1)) return b;
          if (is_num(b, 1)) return a;
          break;
        case BinaryOp::Div:
          if (is_num(b, 1)) return a;
          if (is_num(a, 0) && !bn) return Expr::number(0);
          break;
        case BinaryOp::Pow:
          if (is_num(b, 1)) return a;
          if (is_num(b, 0)) return Expr::number(1);
          break;
      }
      Expr folded = Expr::binary(e.binary_op(), a, b);
      if (an && bn) {
        try {
          return Expr::number(evaluate(folded, {}));
        } catch (const EvalError&) {
          return folded;
        }
      }
      return folded;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// differentiate
// ---------------------------------------------------------------------------

namespace {

Expr diff_raw(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case Expr::Kind::Number:
    case Expr::Kind::Parameter:
      return Expr::number(0);
    case Expr::Kind::Variable:
      return Expr::number(e.name() == var ? 1 : 0);
    case Expr::Kind::Unary: {
      Expr a = e.child_a();
      Expr da = diff_raw(a, var);
      switch (e.unary_op()) {
        case UnaryOp::Neg: return -da;
        case UnaryOp::Sin: return cos(a) * da;
        case UnaryOp::Cos: return -(sin(a) * da);
        case UnaryOp::Tan: return da / pow(cos(a), Expr::number(2));
        case UnaryOp::Exp: return exp(a) * da;
        case UnaryOp::Log: return da / a;
        case UnaryOp::Sqrt: return da / (Expr::number(2) * sqrt(a));
        case UnaryOp::Sinh: return cosh(a) * da;
        case UnaryOp::Cosh: return sinh(a) * da;
        case UnaryOp::Tanh:
          return (Expr::number(1) - pow(tanh(a), Expr::number(2))) * da;
      }
      return Expr::number(0);
    }
    case Expr::Kind::Binary: {
      Expr a = e.child_a();
      Expr b = e.child_b();
      switch (e.binary_op()) {
        case BinaryOp::Add: return diff_raw(a, var) + diff_raw(b, var);
        case BinaryOp::Sub: return diff_raw(a, var) - diff_raw(b, var);
        case BinaryOp::Mul: return diff_raw(a, var) * b + a * diff_raw(b, var);
        case BinaryOp::Div:
          return (diff_raw(a, var) * b - a * diff_raw(b, var)) /
                 pow(b, Expr::number(2));
        case BinaryOp::Pow: {
          if (b.is_constant()) {
            // d(a^c) = c * a^(c-1) * a'
            return b * pow(a, simplify_basic(b - Expr::number(1))) * diff_raw(a, var);
          }
          // non-constant exponent: a^b = exp(b*log a)
          return pow(a, b) * (diff_raw(b, var) * log(a) + b * diff_raw(a, var) / a);
        }
      }
      return Expr::number(0);
    }
  }
  return Expr::number(0);
}

}  // namespace

Expr differentiate(const Expr& e, const std::string& var) {
  return simplify_basic(diff_raw(e, var));
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  // shortest representation that round-trips
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// precedence: add/sub = 1, mul/div = 2, unary minus = 3, pow = 4, atom = 5
int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      return e.number_value() < 0 ? 3 : 5;
    case Expr::Kind::Variable:
    case Expr::Kind::Parameter:
      return 5;
    case Expr::Kind::Unary:
      return e.unary_op() == UnaryOp::Neg ? 3 : 5;
    case Expr::Kind::Binary:
      switch (e.binary_op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
  }
  return 5;
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Sinh: return "sinh";
    case UnaryOp::Cosh: return "cosh";
    case UnaryOp::Tanh: return "tanh";
  }
  return "?";
}

void render(const Expr& e, std::string& out);

void render_child(const Expr& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    render(child, out);
    out += ')';
  } else {
    render(child, out);
  }
}

void render(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      out += fmt_double(e.number_value());
      return;
    case Expr::Kind::Variable:
    case Expr::Kind::Parameter:
      out += e.name();
      return;
    case Expr::Kind::Unary:
      if (e.unary_op() == UnaryOp::Neg) {
        out += '-';
        // a negation or negative literal directly under '-' needs parens
        render_child(e.child_a(), 4, out);
      } else {
        out += unary_name(e.unary_op());
        out += '(';
        render(e.child_a(), out);
        out += ')';
      }
      return;
    case Expr::Kind::Binary: {
      const char* op = nullptr;
      int prec = precedence(e);
      int left_min = prec, right_min = prec + 1;
      switch (e.binary_op()) {
        case BinaryOp::Add: op = " + "; right_min = prec; break;
        case BinaryOp::Sub: op = " - "; break;
        case BinaryOp::Mul: op = "*"; right_min = prec; break;
        case BinaryOp::Div: op = "/"; break;
        case BinaryOp::Pow:
          // right-associative; a base that is itself a power or negation
          // must be parenthesized
          op = "^";
          left_min = prec + 1;
          right_min = prec;
          break;
      }
      render_child(e.child_a(), left_min, out);
      out += op;
      render_child(e.child_b(), right_min, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  if (!e.valid()) return "<empty>";
  std::string out;
  render(e, out);
  return out;
}

}  // namespace curvscan
