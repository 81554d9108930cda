#include "fraktal/field_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "fraktal/errors.hpp"

namespace fraktal {
namespace detail {

enum class Op { Add, Sub, Mul, Div, Pow, Neg };
enum class Func { Sin, Cos, Exp, Abs, Sqrt, Min, Max };

struct ExprNode {
  enum class Kind { Number, VarX, VarY, Unary, Binary, Call } kind;
  double value = 0.0;  // Number
  Op op = Op::Add;     // Unary/Binary
  Func func = Func::Sin;
  std::vector<std::shared_ptr<const ExprNode>> args;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Number;
  n->value = v;
  return n;
}

NodePtr make_var(char c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = c == 'x' ? ExprNode::Kind::VarX : ExprNode::Kind::VarY;
  return n;
}

NodePtr make_unary(NodePtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->op = Op::Neg;
  n->args = {std::move(a)};
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->args = {std::move(a), std::move(b)};
  return n;
}

struct FuncInfo {
  const char* name;
  Func func;
  int arity;
};

constexpr FuncInfo kFuncs[] = {
    {"sin", Func::Sin, 1}, {"cos", Func::Cos, 1}, {"exp", Func::Exp, 1},
    {"abs", Func::Abs, 1}, {"sqrt", Func::Sqrt, 1}, {"min", Func::Min, 2},
    {"max", Func::Max, 2},
};

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", 0);
    NodePtr e = expr();
    skip_ws();
    if (pos_ < text_.size())
      fail("unexpected trailing input, expected operator or end of expression");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "syntax error at offset " << pos_ << ": " << what;
    throw ParseError(os.str(), pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (consume('+'))
        lhs = make_binary(Op::Add, lhs, term());
      else if (consume('-'))
        lhs = make_binary(Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (consume('*'))
        lhs = make_binary(Op::Mul, lhs, factor());
      else if (consume('/'))
        lhs = make_binary(Op::Div, lhs, factor());
      else
        return lhs;
    }
  }

  // factor := '-' factor | primary ('^' factor)?
  // so "-x^2" is -(x^2) and "2^3^2" is 2^(3^2).
  NodePtr factor() {
    if (consume('-')) return make_unary(factor());
    NodePtr base = primary();
    if (consume('^')) return make_binary(Op::Pow, base, factor());
    return base;
  }

  NodePtr primary() {
    const char c = peek();
    if (c == '\0') fail("expected number, variable, function or '('");
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "', expected number, variable, function or '('");
  }

  NodePtr number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected number");
    pos_ += static_cast<std::size_t>(end - begin);
    return make_number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name == "x" || name == "y") return make_var(name[0]);
    for (const FuncInfo& fi : kFuncs) {
      if (name == fi.name) return call(fi);
    }
    pos_ = start;
    throw ConfigError("unknown function or variable '" + name + "' at offset " +
                      std::to_string(start));
  }

  NodePtr call(const FuncInfo& fi) {
    if (!consume('(')) fail(std::string("expected '(' after '") + fi.name + "'");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Call;
    n->func = fi.func;
    n->args.push_back(expr());
    while (consume(',')) n->args.push_back(expr());
    if (!consume(')')) fail("expected ')' or ','");
    if (static_cast<int>(n->args.size()) != fi.arity)
      throw ConfigError(std::string("function '") + fi.name + "' takes " +
                        std::to_string(fi.arity) + " argument(s), got " +
                        std::to_string(n->args.size()));
    return n;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

const char* func_name(Func f) {
  for (const FuncInfo& fi : kFuncs)
    if (fi.func == f) return fi.name;
  return "?";
}

void print_node(const ExprNode& n, std::ostringstream& os) {
  switch (n.kind) {
    case ExprNode::Kind::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      os << buf;
      return;
    }
    case ExprNode::Kind::VarX:
      os << 'x';
      return;
    case ExprNode::Kind::VarY:
      os << 'y';
      return;
    case ExprNode::Kind::Unary:
      os << "(-";
      print_node(*n.args[0], os);
      os << ')';
      return;
    case ExprNode::Kind::Binary: {
      const char* sym = n.op == Op::Add   ? "+"
                        : n.op == Op::Sub ? "-"
                        : n.op == Op::Mul ? "*"
                        : n.op == Op::Div ? "/"
                                          : "^";
      os << '(';
      print_node(*n.args[0], os);
      os << sym;
      print_node(*n.args[1], os);
      os << ')';
      return;
    }
    case ExprNode::Kind::Call: {
      os << func_name(n.func) << '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << ',';
        print_node(*n.args[i], os);
      }
      os << ')';
      return;
    }
  }
}

std::string node_text(const ExprNode& n) {
  std::ostringstream os;
  print_node(n, os);
  return os.str();
}

double eval_node(const ExprNode& n, double x, double y) {
  switch (n.kind) {
    case ExprNode::Kind::Number:
      return n.value;
    case ExprNode::Kind::VarX:
      return x;
    case ExprNode::Kind::VarY:
      return y;
    case ExprNode::Kind::Unary:
      return -eval_node(*n.args[0], x, y);
    case ExprNode::Kind::Binary: {
      const double a = eval_node(*n.args[0], x, y);
      const double b = eval_node(*n.args[1], x, y);
      double r;
      switch (n.op) {
        case Op::Add: r = a + b; break;
        case Op::Sub: r = a - b; break;
        case Op::Mul: r = a * b; break;
        case Op::Div:
          if (b == 0.0)
            throw EvalDomainError("division by zero in '" + node_text(n) + "'",
                                  node_text(n), x, y);
          r = a / b;
          break;
        case Op::Pow:
          r = std::pow(a, b);
          break;
        default:
          r = 0.0;
      }
      if (!std::isfinite(r))
        throw EvalDomainError("non-finite value in '" + node_text(n) + "'", node_text(n), x, y);
      return r;
    }
    case ExprNode::Kind::Call: {
      const double a = eval_node(*n.args[0], x, y);
      double r;
      switch (n.func) {
        case Func::Sin: r = std::sin(a); break;
        case Func::Cos: r = std::cos(a); break;
        case Func::Exp: r = std::exp(a); break;
        case Func::Abs: r = std::fabs(a); break;
        case Func::Sqrt:
          if (a < 0.0)
            throw EvalDomainError("sqrt of negative value in '" + node_text(n) + "'",
                                  node_text(n), x, y);
          r = std::sqrt(a);
          break;
        case Func::Min: r = std::min(a, eval_node(*n.args[1], x, y)); break;
        case Func::Max: r = std::max(a, eval_node(*n.args[1], x, y)); break;
        default: r = 0.0;
      }
      if (!std::isfinite(r))
        throw EvalDomainError("non-finite value in '" + node_text(n) + "'", node_text(n), x, y);
      return r;
    }
  }
  return 0.0;
}

bool equal_node(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::Number:
      return a.value == b.value;
    case ExprNode::Kind::VarX:
    case ExprNode::Kind::VarY:
      return true;
    case ExprNode::Kind::Unary:
      return equal_node(*a.args[0], *b.args[0]);
    case ExprNode::Kind::Binary:
      return a.op == b.op && equal_node(*a.args[0], *b.args[0]) &&
             equal_node(*a.args[1], *b.args[1]);
    case ExprNode::Kind::Call:
      if (a.func != b.func || a.args.size() != b.args.size()) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal_node(*a.args[i], *b.args[i])) return false;
      return true;
  }
  return false;
}

}  // namespace
}  // namespace detail

ScalarField ScalarField::parse(const std::string& text) {
  ScalarField f;
  f.source_ = text;
  f.root_ = detail::Parser(text).run();
  return f;
}

double ScalarField::eval(double x, double y) const {
  if (!root_) throw ConfigError("evaluating an empty field");
  return detail::eval_node(*root_, x, y);
}

std::string ScalarField::print() const {
  if (!root_) return "";
  return detail::node_text(*root_);
}

bool structurally_equal(const ScalarField& a, const ScalarField& b) {
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return detail::equal_node(*a.root_, *b.root_);
}

ScalarField parse_field(const std::string& text) { return ScalarField::parse(text); }

double eval_field(const ScalarField& field, const Point2& p) { return field.eval(p); }

}  // namespace fraktal
