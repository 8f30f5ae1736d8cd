#include "gbsing/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "gbsing/error.hpp"

namespace gbs {

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

constexpr double kGuard = 1e-12;

double real_op(Expr::Op op, double a, double b, double value) {
  switch (op) {
    case Expr::Op::Add: return a + b;
    case Expr::Op::Sub: return a - b;
    case Expr::Op::Mul: return a * b;
    case Expr::Op::Div:
      if (!(std::abs(b) > kGuard)) throw Error(ErrorKind::Domain, "division by ~0");
      return a / b;
    case Expr::Op::Neg: return -a;
    case Expr::Op::Pow:
      if (value != std::round(value) && !(a > kGuard))
        throw Error(ErrorKind::Domain, "non-integer power of non-positive value");
      if (value < 0 && !(std::abs(a) > kGuard)) throw Error(ErrorKind::Domain, "negative power of ~0");
      return std::pow(a, value);
    case Expr::Op::Sqrt:
      if (!(a > kGuard)) throw Error(ErrorKind::Domain, "sqrt of non-positive value");
      return std::sqrt(a);
    case Expr::Op::Sin: return std::sin(a);
    case Expr::Op::Cos: return std::cos(a);
    case Expr::Op::Exp: {
      const double r = std::exp(a);
      if (!std::isfinite(r) || r > 1e300) throw Error(ErrorKind::Overflow, "exp overflow");
      return r;
    }
    case Expr::Op::Log:
      if (!(a > 0.0)) throw Error(ErrorKind::Domain, "log of non-positive value");
      return std::log(a);
    default: break;
  }
  return 0.0;
}

Jet jet_op(Expr::Op op, const Jet& a, const Jet& b, double value) {
  switch (op) {
    case Expr::Op::Add: return a + b;
    case Expr::Op::Sub: return a - b;
    case Expr::Op::Mul: return a * b;
    case Expr::Op::Div: return a / b;
    case Expr::Op::Neg: return -a;
    case Expr::Op::Pow: return pow(a, value);
    case Expr::Op::Sqrt: return sqrt(a);
    case Expr::Op::Sin: return sin(a);
    case Expr::Op::Cos: return cos(a);
    case Expr::Op::Exp: return exp(a);
    case Expr::Op::Log: return log(a);
    default: break;
  }
  return a;
}

double apply(Expr::Op op, double a, double b, double value) { return real_op(op, a, b, value); }
Jet apply(Expr::Op op, const Jet& a, const Jet& b, double value) { return jet_op(op, a, b, value); }

template <class T>
T eval_node(const Expr::Node& n, const VarValues<T>& vars) {
  switch (n.op) {
    case Expr::Op::Const:
      if constexpr (std::is_same_v<T, double>) {
        return n.value;
      } else {
        return Jet::constant(n.value, vars[0].order());
      }
    case Expr::Op::Var: return vars[static_cast<int>(n.var)];
    default: break;
  }
  const T a = eval_node(*n.a, vars);
  if (n.b) {
    const T b = eval_node(*n.b, vars);
    return apply(n.op, a, b, n.value);
  }
  return apply(n.op, a, a, n.value);
}

NodePtr make(Expr::Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = value;
  return n;
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* func_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::Sqrt: return "sqrt";
    case Expr::Op::Sin: return "sin";
    case Expr::Op::Cos: return "cos";
    case Expr::Op::Exp: return "exp";
    case Expr::Op::Log: return "log";
    default: return "?";
  }
}

void print(const Expr::Node& n, std::string& out) {
  static const char* var_names[] = {"u", "v", "x", "y", "z"};
  switch (n.op) {
    case Expr::Op::Const:
      if (n.value < 0) {
        out += "(" + fmt_double(n.value) + ")";
      } else {
        out += fmt_double(n.value);
      }
      return;
    case Expr::Op::Var: out += var_names[static_cast<int>(n.var)]; return;
    case Expr::Op::Add:
    case Expr::Op::Sub:
    case Expr::Op::Mul:
    case Expr::Op::Div: {
      const char sym = n.op == Expr::Op::Add   ? '+'
                       : n.op == Expr::Op::Sub ? '-'
                       : n.op == Expr::Op::Mul ? '*'
                                               : '/';
      out += '(';
      print(*n.a, out);
      out += sym;
      print(*n.b, out);
      out += ')';
      return;
    }
    case Expr::Op::Neg:
      out += "(-";
      print(*n.a, out);
      out += ')';
      return;
    case Expr::Op::Pow:
      out += '(';
      print(*n.a, out);
      out += "^(" + fmt_double(n.value) + "))";
      return;
    default:
      out += func_name(n.op);
      out += '(';
      print(*n.a, out);
      out += ')';
      return;
  }
}

bool node_uses(const Expr::Node& n, Var v) {
  if (n.op == Expr::Op::Var) return n.var == v;
  if (n.op == Expr::Op::Const) return false;
  return node_uses(*n.a, v) || (n.b && node_uses(*n.b, v));
}

NodePtr substitute_node(const NodePtr& n, const std::array<const Expr*, kNumVars>& repl,
                        std::unordered_map<const Expr::Node*, NodePtr>& memo) {
  if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
  NodePtr out;
  if (n->op == Expr::Op::Var) {
    const Expr* r = repl[static_cast<int>(n->var)];
    out = r ? r->node_ptr() : n;
  } else if (n->op == Expr::Op::Const) {
    out = n;
  } else {
    NodePtr a = substitute_node(n->a, repl, memo);
    NodePtr b = n->b ? substitute_node(n->b, repl, memo) : nullptr;
    out = (a == n->a && b == n->b) ? n : make(n->op, a, b, n->value);
  }
  memo.emplace(n.get(), out);
  return out;
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::string_view text, const SymbolTable& symbols) : text_(text), symbols_(symbols) {}

  Expr parse() {
    next();
    Expr e = expr();
    if (tok_ != Tok::End) fail("unexpected token '" + lexeme_ + "'");
    return e;
  }

 private:
  enum class Tok { Number, Name, Op, LParen, RParen, End };

  [[noreturn]] void fail(const std::string& msg) const {
    throw ExprParseError(msg, tok_pos_ + 1);
  }

  void next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    tok_pos_ = pos_;
    if (pos_ >= text_.size()) {
      tok_ = Tok::End;
      lexeme_ = "<end>";
      return;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
        ++end;
      if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
        std::size_t k = end + 1;
        if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
        if (k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]))) {
          end = k;
          while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
        }
      }
      lexeme_ = std::string(text_.substr(pos_, end - pos_));
      char* stop = nullptr;
      number_ = std::strtod(lexeme_.c_str(), &stop);
      if (stop != lexeme_.c_str() + lexeme_.size()) fail("malformed number '" + lexeme_ + "'");
      pos_ = end;
      tok_ = Tok::Number;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
      lexeme_ = std::string(text_.substr(pos_, end - pos_));
      pos_ = end;
      tok_ = Tok::Name;
      return;
    }
    lexeme_ = std::string(1, c);
    ++pos_;
    if (c == '(') {
      tok_ = Tok::LParen;
    } else if (c == ')') {
      tok_ = Tok::RParen;
    } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      tok_ = Tok::Op;
    } else {
      fail("unexpected character '" + lexeme_ + "'");
    }
  }

  bool is_op(char c) const { return tok_ == Tok::Op && lexeme_[0] == c; }

  Expr expr() {
    Expr lhs = term();
    while (is_op('+') || is_op('-')) {
      const char op = lexeme_[0];
      next();
      Expr rhs = term();
      lhs = op == '+' ? lhs + rhs : lhs - rhs;
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (is_op('*') || is_op('/')) {
      const char op = lexeme_[0];
      next();
      Expr rhs = unary();
      lhs = op == '*' ? lhs * rhs : lhs / rhs;
    }
    return lhs;
  }

  Expr unary() {
    if (is_op('-')) {
      next();
      return -unary();
    }
    if (is_op('+')) {
      next();
      return unary();
    }
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (is_op('^')) {
      const std::size_t at = tok_pos_;
      next();
      Expr exponent = unary();
      if (!exponent.is_constant()) {
        tok_pos_ = at;
        fail("exponent after '^' must be constant");
      }
      return pow(base, exponent.eval(0.0, 0.0));
    }
    return base;
  }

  Expr atom() {
    if (tok_ == Tok::Number) {
      Expr e = Expr::constant(number_);
      next();
      return e;
    }
    if (tok_ == Tok::LParen) {
      next();
      Expr e = expr();
      if (tok_ != Tok::RParen) fail("expected ')' but found '" + lexeme_ + "'");
      next();
      return e;
    }
    if (tok_ == Tok::Name) {
      const std::string name = lexeme_;
      const std::size_t name_pos = tok_pos_;
      next();
      static const std::map<std::string, Expr::Op, std::less<>> funcs = {
          {"sqrt", Expr::Op::Sqrt}, {"sin", Expr::Op::Sin}, {"cos", Expr::Op::Cos},
          {"exp", Expr::Op::Exp},   {"log", Expr::Op::Log}};
      if (auto f = funcs.find(name); f != funcs.end()) {
        if (tok_ != Tok::LParen) fail("expected '(' after function '" + name + "'");
        next();
        Expr arg = expr();
        if (tok_ != Tok::RParen) fail("expected ')' but found '" + lexeme_ + "'");
        next();
        return Expr::apply(f->second, arg);
      }
      if (name == "pi") return Expr::constant(std::numbers::pi);
      if (name == "u" || name == "t") return Expr::u();
      if (name == "v") return Expr::v();
      if (name == "x") return Expr::variable(Var::X);
      if (name == "y") return Expr::variable(Var::Y);
      if (name == "z") return Expr::variable(Var::Z);
      if (auto s = symbols_.find(name); s != symbols_.end()) return s->second;
      tok_pos_ = name_pos;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected token '" + lexeme_ + "'");
  }

  std::string_view text_;
  const SymbolTable& symbols_;
  std::size_t pos_ = 0;
  std::size_t tok_pos_ = 0;
  Tok tok_ = Tok::End;
  std::string lexeme_;
  double number_ = 0.0;
};

}  // namespace

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = value;
  return Expr(n);
}

Expr Expr::variable(Var v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = v;
  return Expr(n);
}

Expr Expr::apply(Op fn, const Expr& arg) { return Expr(make(fn, arg.node_)); }

Expr Expr::power(const Expr& base, double exponent) {
  if (exponent == 1.0) return base;
  return Expr(make(Op::Pow, base.node_, nullptr, exponent));
}

double Expr::eval(const VarValues<double>& vars) const { return eval_node(*node_, vars); }
Jet Expr::eval(const VarValues<Jet>& vars) const { return eval_node(*node_, vars); }

double Expr::eval(double u, double v) const {
  return eval(VarValues<double>{u, v, 0.0, 0.0, 0.0});
}

Jet Expr::jet(double u, double v, int order) const {
  const Jet zero = Jet::constant(0.0, order);
  return eval(VarValues<Jet>{Jet::variable(0, u, order), Jet::variable(1, v, order), zero, zero,
                             zero});
}

bool Expr::uses(Var v) const { return node_uses(*node_, v); }

bool Expr::is_constant() const {
  for (int k = 0; k < kNumVars; ++k)
    if (uses(static_cast<Var>(k))) return false;
  return true;
}

Expr Expr::substitute(const std::array<const Expr*, kNumVars>& repl) const {
  std::unordered_map<const Node*, NodePtr> memo;
  return Expr(substitute_node(node_, repl, memo));
}

std::string Expr::str() const {
  std::string out;
  print(*node_, out);
  return out;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(make(Expr::Op::Add, a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make(Expr::Op::Sub, a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make(Expr::Op::Mul, a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make(Expr::Op::Div, a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(make(Expr::Op::Neg, a.node_)); }

Expr sqrt(const Expr& e) { return Expr::apply(Expr::Op::Sqrt, e); }
Expr sin(const Expr& e) { return Expr::apply(Expr::Op::Sin, e); }
Expr cos(const Expr& e) { return Expr::apply(Expr::Op::Cos, e); }
Expr exp(const Expr& e) { return Expr::apply(Expr::Op::Exp, e); }
Expr log(const Expr& e) { return Expr::apply(Expr::Op::Log, e); }
Expr pow(const Expr& e, double exponent) { return Expr::power(e, exponent); }

// ---------------------------------------------------------------- tape

CompiledExpr::CompiledExpr(const Expr& e) {
  std::unordered_map<const Expr::Node*, int> slot;
  auto emit = [&](auto&& self, const Expr::Node& n) -> int {
    if (auto it = slot.find(&n); it != slot.end()) return it->second;
    Instr ins{n.op, n.value, static_cast<int>(n.var), -1, -1};
    if (n.op == Expr::Op::Var) uses_[ins.var] = true;
    if (n.a) ins.a = self(self, *n.a);
    if (n.b) ins.b = self(self, *n.b);
    tape_.push_back(ins);
    const int id = static_cast<int>(tape_.size()) - 1;
    slot.emplace(&n, id);
    return id;
  };
  emit(emit, e.node());
}

template <class T>
T CompiledExpr::run(const VarValues<T>& vars) const {
  std::vector<T> regs(tape_.size());
  for (std::size_t k = 0; k < tape_.size(); ++k) {
    const Instr& ins = tape_[k];
    switch (ins.op) {
      case Expr::Op::Const:
        if constexpr (std::is_same_v<T, double>) {
          regs[k] = ins.value;
        } else {
          regs[k] = Jet::constant(ins.value, vars[0].order());
        }
        break;
      case Expr::Op::Var: regs[k] = vars[ins.var]; break;
      default: {
        const T& a = regs[ins.a];
        const T& b = ins.b >= 0 ? regs[ins.b] : a;
        regs[k] = apply(ins.op, a, b, ins.value);
      }
    }
  }
  return regs.back();
}

double CompiledExpr::eval(const VarValues<double>& vars) const { return run(vars); }
Jet CompiledExpr::eval(const VarValues<Jet>& vars) const { return run(vars); }

Expr parse_expr(std::string_view text, const SymbolTable& symbols) {
  return Parser(text, symbols).parse();
}

}  // namespace gbs
