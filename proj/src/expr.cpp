#include "lnafim/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "lnafim/errors.hpp"

namespace lnafim {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  int index = 0;
  std::vector<Expr> args;
};

namespace {

double checked_div(double a, double b) {
  if (b == 0.0) throw EvalError("division by zero");
  return a / b;
}

double checked_log(double a) {
  if (!(a > 0.0)) throw EvalError("log of non-positive value");
  return std::log(a);
}

double checked_sqrt(double a) {
  if (a < 0.0) throw EvalError("sqrt of negative value");
  return std::sqrt(a);
}

double checked_pow(double a, double b) {
  if (a == 0.0 && b < 0.0) throw EvalError("division by zero");
  if (a < 0.0 && b != std::floor(b)) throw EvalError("non-integer power of negative value");
  return std::pow(a, b);
}

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Exp: return std::exp(a);
    case Op::Log: return checked_log(a);
    case Op::Sqrt: return checked_sqrt(a);
    default: break;
  }
  throw std::logic_error("not a unary op");
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return checked_div(a, b);
    case Op::Pow: return checked_pow(a, b);
    default: break;
  }
  throw std::logic_error("not a binary op");
}

}  // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::make(Op op, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return Expr(std::move(n));
}

Expr Expr::constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::species(int i) {
  auto n = std::make_shared<Node>();
  n->op = Op::Species;
  n->index = i;
  return Expr(std::move(n));
}

Expr Expr::param(int i) {
  auto n = std::make_shared<Node>();
  n->op = Op::Param;
  n->index = i;
  return Expr(std::move(n));
}

Expr Expr::time() { return make(Op::Time, {}); }

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
int Expr::index() const { return node_->index; }
const std::vector<Expr>& Expr::args() const { return node_->args; }

// Constant folding in the smart constructors only fires when the folded
// value is finite, so e.g. 1/0 stays symbolic and fails at evaluation.

Expr Expr::neg(Expr a) {
  if (a.is_constant()) return constant(-a.value());
  if (a.op() == Op::Neg) return a.args()[0];
  return make(Op::Neg, {std::move(a)});
}

Expr Expr::exp(Expr a) {
  if (a.is_constant()) return constant(std::exp(a.value()));
  return make(Op::Exp, {std::move(a)});
}

Expr Expr::log(Expr a) {
  if (a.is_constant() && a.value() > 0.0) return constant(std::log(a.value()));
  return make(Op::Log, {std::move(a)});
}

Expr Expr::sqrt(Expr a) {
  if (a.is_constant() && a.value() >= 0.0) return constant(std::sqrt(a.value()));
  return make(Op::Sqrt, {std::move(a)});
}

Expr Expr::add(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) return constant(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return make(Op::Add, {std::move(a), std::move(b)});
}

Expr Expr::sub(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) return constant(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(std::move(b));
  return make(Op::Sub, {std::move(a), std::move(b)});
}

Expr Expr::mul(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant()) return constant(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return neg(std::move(b));
  if (b.is_constant(-1.0)) return neg(std::move(a));
  return make(Op::Mul, {std::move(a), std::move(b)});
}

Expr Expr::div(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0)
    return constant(a.value() / b.value());
  if (a.is_constant(0.0) && !(b.is_constant(0.0))) return constant(0.0);
  if (b.is_constant(1.0)) return a;
  return make(Op::Div, {std::move(a), std::move(b)});
}

Expr Expr::pow(Expr base, Expr exponent) {
  if (!exponent.is_constant())
    throw InputError("exponent of '^' must be a constant expression");
  const double c = exponent.value();
  if (c == 0.0) return constant(1.0);
  if (c == 1.0) return base;
  if (base.is_constant()) {
    const double v = base.value();
    if (!(v == 0.0 && c < 0.0) && !(v < 0.0 && c != std::floor(c)))
      return constant(std::pow(v, c));
  }
  return make(Op::Pow, {std::move(base), std::move(exponent)});
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Const: return a.value() == b.value();
    case Op::Species:
    case Op::Param: return a.index() == b.index();
    case Op::Time: return true;
    default: break;
  }
  const auto& x = a.args();
  const auto& y = b.args();
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] == y[i])) return false;
  return true;
}

double evaluate(const Expr& e, const EvalEnv& env) {
  switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Species: return env.species[static_cast<std::size_t>(e.index())];
    case Op::Param: return env.params[static_cast<std::size_t>(e.index())];
    case Op::Time: return env.t;
    case Op::Neg:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt: return apply_unary(e.op(), evaluate(e.args()[0], env));
    default: break;
  }
  return apply_binary(e.op(), evaluate(e.args()[0], env), evaluate(e.args()[1], env));
}

Expr differentiate(const Expr& e, Symbol s) {
  switch (e.op()) {
    case Op::Const: return Expr::constant(0.0);
    case Op::Species:
      return Expr::constant(s.kind == Symbol::Kind::Species && s.index == e.index() ? 1.0 : 0.0);
    case Op::Param:
      return Expr::constant(s.kind == Symbol::Kind::Param && s.index == e.index() ? 1.0 : 0.0);
    case Op::Time: return Expr::constant(s.kind == Symbol::Kind::Time ? 1.0 : 0.0);
    default: break;
  }
  const auto& a = e.args();
  const Expr du = differentiate(a[0], s);
  switch (e.op()) {
    case Op::Neg: return -du;
    case Op::Exp: return e * du;
    case Op::Log: return du / a[0];
    case Op::Sqrt: return du / (Expr::constant(2.0) * e);
    default: break;
  }
  const Expr dv = differentiate(a[1], s);
  switch (e.op()) {
    case Op::Add: return du + dv;
    case Op::Sub: return du - dv;
    case Op::Mul: return du * a[1] + a[0] * dv;
    case Op::Div:
      if (dv.is_constant(0.0)) return du / a[1];
      return (du * a[1] - a[0] * dv) / Expr::pow(a[1], Expr::constant(2.0));
    case Op::Pow: {
      const double c = a[1].value();
      return Expr::constant(c) * Expr::pow(a[0], Expr::constant(c - 1.0)) * du;
    }
    default: break;
  }
  throw std::logic_error("differentiate: unknown op");
}

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

void print(const Expr& e, const SymbolNames& names, std::string& out);

void print_child(const Expr& e, bool parens, const SymbolNames& names, std::string& out) {
  if (parens) out += '(';
  print(e, names, out);
  if (parens) out += ')';
}

void print(const Expr& e, const SymbolNames& names, std::string& out) {
  switch (e.op()) {
    case Op::Const:
      // A negative literal re-parses as unary minus folded into a constant.
      if (e.value() < 0.0 || std::signbit(e.value())) {
        out += "(-";
        out += format_number(-e.value());
        out += ')';
      } else {
        out += format_number(e.value());
      }
      return;
    case Op::Species: out += names.species[static_cast<std::size_t>(e.index())]; return;
    case Op::Param: out += names.params[static_cast<std::size_t>(e.index())]; return;
    case Op::Time: out += 't'; return;
    case Op::Neg:
      out += '-';
      print_child(e.args()[0], precedence(e.args()[0]) < 4, names, out);
      return;
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
      out += e.op() == Op::Exp ? "exp(" : e.op() == Op::Log ? "log(" : "sqrt(";
      print(e.args()[0], names, out);
      out += ')';
      return;
    default: break;
  }
  const int p = precedence(e);
  const auto& a = e.args();
  if (e.op() == Op::Pow) {
    print_child(a[0], precedence(a[0]) <= p, names, out);
    out += '^';
    print(a[1], names, out);
    return;
  }
  print_child(a[0], precedence(a[0]) < p, names, out);
  switch (e.op()) {
    case Op::Add: out += " + "; break;
    case Op::Sub: out += " - "; break;
    case Op::Mul: out += " * "; break;
    default: out += " / "; break;
  }
  print_child(a[1], precedence(a[1]) <= p, names, out);
}

}  // namespace

std::string to_string(const Expr& e, const SymbolNames& names) {
  std::string out;
  print(e, names, out);
  return out;
}

namespace {

void emit(const Expr& e, std::vector<std::pair<Op, std::pair<int, double>>>& code, int& depth,
          int& max_depth) {
  switch (e.op()) {
    case Op::Const:
    case Op::Species:
    case Op::Param:
    case Op::Time:
      code.push_back({e.op(), {e.index(), e.value()}});
      max_depth = std::max(max_depth, ++depth);
      return;
    default: break;
  }
  for (const auto& a : e.args()) emit(a, code, depth, max_depth);
  code.push_back({e.op(), {0, 0.0}});
  if (e.args().size() == 2) --depth;
}

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e) {
  std::vector<std::pair<Op, std::pair<int, double>>> code;
  int depth = 0;
  emit(e, code, depth, depth_);
  code_.reserve(code.size());
  for (const auto& [op, iv] : code) code_.push_back({op, iv.first, iv.second});
  zero_ = e.is_constant(0.0);
}

double CompiledExpr::operator()(const double* species, const double* params, double t) const {
  if (code_.empty()) return 0.0;
  std::array<double, 64> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (depth_ > static_cast<int>(small.size())) {
    large.resize(static_cast<std::size_t>(depth_));
    stack = large.data();
  }
  int sp = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const: stack[sp++] = ins.value; break;
      case Op::Species: stack[sp++] = species[ins.index]; break;
      case Op::Param: stack[sp++] = params[ins.index]; break;
      case Op::Time: stack[sp++] = t; break;
      case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::Exp:
      case Op::Log:
      case Op::Sqrt: stack[sp - 1] = apply_unary(ins.op, stack[sp - 1]); break;
      case Op::Add: --sp; stack[sp - 1] += stack[sp]; break;
      case Op::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case Op::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
      case Op::Div:
      case Op::Pow:
        --sp;
        stack[sp - 1] = apply_binary(ins.op, stack[sp - 1], stack[sp]);
        break;
    }
  }
  return stack[0];
}

}  // namespace lnafim
