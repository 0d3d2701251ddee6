#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lnafim {

enum class Op : std::uint8_t {
  Const,
  Species,
  Param,
  Time,
  Neg,
  Exp,
  Log,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

/// Which symbol an expression is differentiated against.
struct Symbol {
  enum class Kind : std::uint8_t { Species, Param, Time };
  Kind kind;
  int index = 0;

  static Symbol species(int i) { return {Kind::Species, i}; }
  static Symbol param(int i) { return {Kind::Param, i}; }
  static Symbol time() { return {Kind::Time, 0}; }
};

/// Immutable rate-law expression tree.
///
/// Nodes are shared, so copies are cheap. All constructors fold constants
/// and drop neutral elements (x+0, x*1, 0*x, x^1, -(-x)), which keeps
/// symbolic derivatives small. The exponent of `^` is always a constant.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double v);
  static Expr species(int i);
  static Expr param(int i);
  static Expr time();

  static Expr neg(Expr a);
  static Expr exp(Expr a);
  static Expr log(Expr a);
  static Expr sqrt(Expr a);
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr mul(Expr a, Expr b);
  static Expr div(Expr a, Expr b);
  /// Throws InputError when `exponent` is not a constant.
  static Expr pow(Expr base, Expr exponent);

  Op op() const;
  double value() const;  // Const only
  int index() const;     // Species / Param only
  const std::vector<Expr>& args() const;

  bool is_constant() const { return op() == Op::Const; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  /// Structural equality.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Expr make(Op op, std::vector<Expr> args);
  std::shared_ptr<const Node> node_;
};

inline Expr operator+(Expr a, Expr b) { return Expr::add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::mul(std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return Expr::div(std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return Expr::neg(std::move(a)); }

struct EvalEnv {
  std::span<const double> species;
  std::span<const double> params;
  double t = 0.0;
};

/// Direct tree-walking evaluation. Throws EvalError on division by zero
/// and on log/sqrt/pow domain violations.
double evaluate(const Expr& e, const EvalEnv& env);

/// Exact symbolic derivative with respect to `s`.
Expr differentiate(const Expr& e, Symbol s);

/// Names used when printing an expression.
struct SymbolNames {
  std::span<const std::string> species;
  std::span<const std::string> params;
};

/// Prints in the model-DSL expression syntax with the minimum parentheses
/// needed for the result to re-parse into an identical tree.
std::string to_string(const Expr& e, const SymbolNames& names);

/// Expression flattened to a postfix program for hot loops (ODE right-hand
/// sides, SSA propensities). Same semantics and errors as evaluate().
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  double operator()(const double* species, const double* params, double t) const;
  double operator()(const EvalEnv& env) const {
    return (*this)(env.species.data(), env.params.data(), env.t);
  }

  bool is_zero() const { return zero_; }
  bool is_constant() const { return code_.size() == 1 && code_[0].op == Op::Const; }

 private:
  struct Instr {
    Op op;
    int index;
    double value;
  };
  std::vector<Instr> code_;
  int depth_ = 0;
  bool zero_ = true;
};

}  // namespace lnafim
