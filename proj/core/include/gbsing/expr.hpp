#pragma once

/// Closed-form scalar expressions in the chart coordinates (u, v).
///
/// On the sphere atlas three more variables are available: x, y, z, the
/// coordinates of the unit-sphere point represented by (u, v) in the current
/// chart. Expressions evaluate in plain doubles or in Jet arithmetic; both
/// paths share the same domain guards so their degree-0 values agree.

#include <array>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gbsing/jet.hpp"

namespace gbs {

enum class Var : int { U = 0, V = 1, X = 2, Y = 3, Z = 4 };
inline constexpr int kNumVars = 5;

template <class T>
using VarValues = std::array<T, kNumVars>;

class Expr {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sqrt, Sin, Cos, Exp, Log };

  struct Node {
    Op op = Op::Const;
    double value = 0.0;  // constant value, or exponent for Pow
    Var var = Var::U;
    std::shared_ptr<const Node> a, b;
  };

  Expr() : Expr(constant(0.0)) {}
  static Expr constant(double value);
  static Expr variable(Var v);
  static Expr u() { return variable(Var::U); }
  static Expr v() { return variable(Var::V); }
  static Expr apply(Op fn, const Expr& arg);
  static Expr power(const Expr& base, double exponent);

  double eval(const VarValues<double>& vars) const;
  Jet eval(const VarValues<Jet>& vars) const;
  double eval(double u, double v) const;
  /// Taylor expansion at (u, v); the expression must not use x, y, z.
  Jet jet(double u, double v, int order) const;

  bool uses(Var v) const;
  bool is_constant() const;
  /// Substitute expressions for variables (nullptr entries keep the variable).
  Expr substitute(const std::array<const Expr*, kNumVars>& repl) const;

  /// Fully parenthesized, round-trippable text.
  std::string str() const;

  const Node& node() const { return *node_; }
  const std::shared_ptr<const Node>& node_ptr() const { return node_; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr sqrt(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr pow(const Expr& e, double exponent);

/// Flattened evaluation tape with shared sub-expressions evaluated once.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  double eval(const VarValues<double>& vars) const;
  Jet eval(const VarValues<Jet>& vars) const;
  bool uses(Var v) const { return uses_[static_cast<int>(v)]; }

 private:
  struct Instr {
    Expr::Op op;
    double value;
    int var;
    int a;
    int b;
  };
  template <class T>
  T run(const VarValues<T>& vars) const;

  std::vector<Instr> tape_;
  std::array<bool, kNumVars> uses_{};
};

/// Named expressions available to the parser (scene `[defs]` entries).
using SymbolTable = std::map<std::string, Expr, std::less<>>;

/// Parse infix text. Grammar (precedence low to high):
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?          exponent must be constant
///   atom   := number | 'pi' | 'u' | 'v' | 't' | 'x' | 'y' | 'z' | name
///           | func '(' expr ')' | '(' expr ')'
///   func   := sqrt | sin | cos | exp | log
/// `t` is an alias of `u` (curve parameter). Throws Error(Parse) naming the
/// offending token and its column.
Expr parse_expr(std::string_view text, const SymbolTable& symbols = {});

}  // namespace gbs
