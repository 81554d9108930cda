#pragma once

#include <memory>
#include <string>

#include "fraktal/geometry.hpp"

namespace fraktal {

namespace detail {
struct ExprNode;
}

// A scalar coefficient field over the plane, parsed from a small arithmetic
// expression language over the variables x and y.
//
// Grammar:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | primary ('^' factor)?
//   primary := number | 'x' | 'y' | func '(' expr (',' expr)* ')' | '(' expr ')'
// '^' is right-associative and unary minus applies to the whole power, so
// "-x^2" evaluates as -(x^2). Functions: sin cos exp abs sqrt min max.
class ScalarField {
 public:
  ScalarField() = default;

  // Parses `text`; throws ParseError (with byte offset) on bad syntax,
  // ConfigError for unknown functions or wrong arity.
  static ScalarField parse(const std::string& text);

  // Evaluates at (x, y). Division by zero, sqrt of a negative number,
  // or any non-finite intermediate raise EvalDomainError.
  double eval(double x, double y) const;
  double eval(const Point2& p) const { return eval(p.x(), p.y()); }

  // Canonical fully parenthesized rendering; parse(print()) is structurally
  // equal to the original tree.
  std::string print() const;

  const std::string& source() const { return source_; }
  bool empty() const { return !root_; }

  // Structural equality of the parsed trees (used by round-trip tests).
  friend bool structurally_equal(const ScalarField& a, const ScalarField& b);

 private:
  std::string source_;
  std::shared_ptr<const detail::ExprNode> root_;
};

ScalarField parse_field(const std::string& text);
double eval_field(const ScalarField& field, const Point2& p);

}  // namespace fraktal
