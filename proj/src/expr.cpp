#include "kslab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "kslab/types.hpp"

namespace kslab {
namespace {

// ---------------------------------------------------------------------------
// Expression tree
// ---------------------------------------------------------------------------

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Call };

enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  Real value = 0.0;        // Const
  Fn fn = Fn::Sin;         // Call
  NodePtr a, b;            // operands

  explicit Node(Real v) : op(Op::Const), value(v) {}
  explicit Node(Op o) : op(o) {}
  Node(Op o, NodePtr x) : op(o), a(std::move(x)) {}
  Node(Op o, NodePtr x, NodePtr y) : op(o), a(std::move(x)), b(std::move(y)) {}
  Node(Fn f, NodePtr x) : op(Op::Call), fn(f), a(std::move(x)) {}
};

NodePtr num(Real v) { return std::make_shared<Node>(v); }

bool is_const(const NodePtr& n, Real v) {
  return n->op == Op::Const && n->value == v;
}

// Constructors with constant folding and the obvious 0/1 identities; these
// keep repeated differentiation from ballooning the tree.
NodePtr add(NodePtr x, NodePtr y) {
  if (x->op == Op::Const && y->op == Op::Const) return num(x->value + y->value);
  if (is_const(x, 0.0)) return y;
  if (is_const(y, 0.0)) return x;
  return std::make_shared<Node>(Op::Add, std::move(x), std::move(y));
}

NodePtr sub(NodePtr x, NodePtr y) {
  if (x->op == Op::Const && y->op == Op::Const) return num(x->value - y->value);
  if (is_const(y, 0.0)) return x;
  if (is_const(x, 0.0)) return std::make_shared<Node>(Op::Neg, std::move(y));
  return std::make_shared<Node>(Op::Sub, std::move(x), std::move(y));
}

NodePtr mul(NodePtr x, NodePtr y) {
  if (x->op == Op::Const && y->op == Op::Const) return num(x->value * y->value);
  if (is_const(x, 0.0) || is_const(y, 0.0)) return num(0.0);
  if (is_const(x, 1.0)) return y;
  if (is_const(y, 1.0)) return x;
  return std::make_shared<Node>(Op::Mul, std::move(x), std::move(y));
}

NodePtr div(NodePtr x, NodePtr y) {
  if (is_const(x, 0.0)) return num(0.0);
  if (is_const(y, 1.0)) return x;
  if (x->op == Op::Const && y->op == Op::Const && y->value != 0.0)
    return num(x->value / y->value);
  return std::make_shared<Node>(Op::Div, std::move(x), std::move(y));
}

NodePtr neg(NodePtr x) {
  if (x->op == Op::Const) return num(-x->value);
  if (x->op == Op::Neg) return x->a;
  return std::make_shared<Node>(Op::Neg, std::move(x));
}

NodePtr pow_node(NodePtr x, NodePtr y) {
  if (x->op == Op::Const && y->op == Op::Const)
    return num(std::pow(x->value, y->value));
  if (is_const(y, 0.0)) return num(1.0);
  if (is_const(y, 1.0)) return x;
  return std::make_shared<Node>(Op::Pow, std::move(x), std::move(y));
}

NodePtr call(Fn f, NodePtr x) {
  if (x->op == Op::Const) {
    const Real v = x->value;
    switch (f) {
      case Fn::Sin:  return num(std::sin(v));
      case Fn::Cos:  return num(std::cos(v));
      case Fn::Tan:  return num(std::tan(v));
      case Fn::Exp:  return num(std::exp(v));
      case Fn::Log:  return num(std::log(v));
      case Fn::Sqrt: return num(std::sqrt(v));
      case Fn::Sinh: return num(std::sinh(v));
      case Fn::Cosh: return num(std::cosh(v));
      case Fn::Tanh: return num(std::tanh(v));
    }
  }
  return std::make_shared<Node>(f, std::move(x));
}

Real eval(const Node& n, Real x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var:   return x;
    case Op::Add:   return eval(*n.a, x) + eval(*n.b, x);
    case Op::Sub:   return eval(*n.a, x) - eval(*n.b, x);
    case Op::Mul:   return eval(*n.a, x) * eval(*n.b, x);
    case Op::Div: {
      const Real d = eval(*n.b, x);
      if (d == 0.0) fail(ErrorCode::ZeroDenominator, "expression divides by zero");
      return eval(*n.a, x) / d;
    }
    case Op::Neg:   return -eval(*n.a, x);
    case Op::Pow:   return std::pow(eval(*n.a, x), eval(*n.b, x));
    case Op::Call: {
      const Real v = eval(*n.a, x);
      switch (n.fn) {
        case Fn::Sin:  return std::sin(v);
        case Fn::Cos:  return std::cos(v);
        case Fn::Tan:  return std::tan(v);
        case Fn::Exp:  return std::exp(v);
        case Fn::Log:  return std::log(v);
        case Fn::Sqrt: return std::sqrt(v);
        case Fn::Sinh: return std::sinh(v);
        case Fn::Cosh: return std::cosh(v);
        case Fn::Tanh: return std::tanh(v);
      }
    }
  }
  fail(ErrorCode::ParseError, "corrupt expression tree");
}

NodePtr diff(const NodePtr& n);

NodePtr diff_call(const Node& n) {
  const NodePtr& u = n.a;
  NodePtr du = diff(u);
  switch (n.fn) {
    case Fn::Sin:  return mul(call(Fn::Cos, u), du);
    case Fn::Cos:  return neg(mul(call(Fn::Sin, u), du));
    case Fn::Tan: {
      NodePtr sec2 = add(num(1.0), pow_node(call(Fn::Tan, u), num(2.0)));
      return mul(sec2, du);
    }
    case Fn::Exp:  return mul(call(Fn::Exp, u), du);
    case Fn::Log:  return div(du, u);
    case Fn::Sqrt: return div(du, mul(num(2.0), call(Fn::Sqrt, u)));
    case Fn::Sinh: return mul(call(Fn::Cosh, u), du);
    case Fn::Cosh: return mul(call(Fn::Sinh, u), du);
    case Fn::Tanh: {
      NodePtr sech2 = sub(num(1.0), pow_node(call(Fn::Tanh, u), num(2.0)));
      return mul(sech2, du);
    }
  }
  fail(ErrorCode::ParseError, "corrupt expression tree");
}

NodePtr diff(const NodePtr& n) {
  switch (n->op) {
    case Op::Const: return num(0.0);
    case Op::Var:   return num(1.0);
    case Op::Add:   return add(diff(n->a), diff(n->b));
    case Op::Sub:   return sub(diff(n->a), diff(n->b));
    case Op::Neg:   return neg(diff(n->a));
    case Op::Mul:
      return add(mul(diff(n->a), n->b), mul(n->a, diff(n->b)));
    case Op::Div: {
      NodePtr top = sub(mul(diff(n->a), n->b), mul(n->a, diff(n->b)));
      return div(top, pow_node(n->b, num(2.0)));
    }
    case Op::Pow: {
      if (n->b->op == Op::Const) {
        // d(f^c) = c f^(c-1) f'
        const Real c = n->b->value;
        return mul(mul(num(c), pow_node(n->a, num(c - 1.0))), diff(n->a));
      }
      // General case via f^g = exp(g log f).
      NodePtr lhs = mul(diff(n->b), call(Fn::Log, n->a));
      NodePtr rhs = div(mul(n->b, diff(n->a)), n->a);
      return mul(pow_node(n->a, n->b), add(lhs, rhs));
    }
    case Op::Call:  return diff_call(*n);
  }
  fail(ErrorCode::ParseError, "corrupt expression tree");
}

// ---------------------------------------------------------------------------
// Recursive-descent parser
// ---------------------------------------------------------------------------

class Parser {
 public:
  Parser(const std::string& src, const std::string& var)
      : src_(src), var_(var) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != src_.size()) err("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void err(const std::string& what) const {
    std::ostringstream os;
    os << "expression error at position " << pos_ << ": " << what << " in \""
       << src_ << "\"";
    fail(ErrorCode::ParseError, os.str());
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr expression() {
    NodePtr e = term();
    for (;;) {
      if (consume('+')) e = add(e, term());
      else if (consume('-')) e = sub(e, term());
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (consume('*')) e = mul(e, factor());
      else if (consume('/')) e = div(e, factor());
      else return e;
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (consume('^')) return pow_node(base, factor());  // right associative
    return base;
  }

  NodePtr unary() {
    if (consume('-')) return neg(unary());
    if (consume('+')) return unary();
    return primary();
  }

  NodePtr primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!consume(')')) err("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    err("expected a number, name, or '('");
  }

  NodePtr number() {
    // from_chars instead of strtod: no locale, and no surprise acceptance of
    // hex, infinities, or signed literals (signs belong to the grammar).
    const char* begin = src_.c_str() + pos_;
    const char* last = src_.c_str() + src_.size();
    Real v = 0.0;
    const auto res = std::from_chars(begin, last, v, std::chars_format::general);
    if (res.ec != std::errc() || res.ptr == begin) err("malformed number");
    pos_ = static_cast<std::size_t>(res.ptr - src_.c_str());
    return num(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name = src_.substr(start, pos_ - start);
    if (name == var_) return std::make_shared<Node>(Op::Var);
    if (name == "pi") return num(kPi);
    if (name == "e") return num(std::exp(1.0));

    static const std::pair<const char*, Fn> kFns[] = {
        {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"tan", Fn::Tan},
        {"exp", Fn::Exp},   {"log", Fn::Log},   {"sqrt", Fn::Sqrt},
        {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh}, {"tanh", Fn::Tanh}};
    for (const auto& [fname, fn] : kFns) {
      if (name == fname) {
        if (!consume('(')) err("function '" + name + "' needs '('");
        NodePtr arg = expression();
        if (!consume(')')) err("missing ')' after argument of '" + name + "'");
        return call(fn, arg);
      }
    }
    pos_ = start;
    err("unknown name '" + name + "' (variable here is '" + var_ + "')");
  }

  const std::string& src_;
  const std::string var_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Smooth1 adapter: derivatives precomputed symbolically at construction so
// evaluation is lock-free under concurrent use.
// ---------------------------------------------------------------------------

class ExprSmooth1 final : public Smooth1 {
 public:
  explicit ExprSmooth1(NodePtr root) {
    trees_.push_back(std::move(root));
    for (int k = 1; k <= kMaxDerivOrder + 1; ++k)
      trees_.push_back(diff(trees_.back()));
  }

  Real deriv(int order, Real x) const override {
    if (order < 0 || order >= static_cast<int>(trees_.size()))
      fail(ErrorCode::InvalidArgument,
           "expression derivative order out of range");
    return eval(*trees_[static_cast<std::size_t>(order)], x);
  }

 private:
  std::vector<NodePtr> trees_;
};

}  // namespace

Smooth1Ptr parse_expression(const std::string& src, const std::string& var) {
  Parser p(src, var);
  return std::make_shared<ExprSmooth1>(p.parse());
}

}  // namespace kslab
