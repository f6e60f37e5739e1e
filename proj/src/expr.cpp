#include "vpt/expr.hpp"

#include <cmath>

#include "vpt/diagnostic.hpp"

namespace vpt {
namespace {

double eval_unchecked(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number: return e.number_value();
    case Expr::Kind::Add: return eval_unchecked(e.lhs()) + eval_unchecked(e.rhs());
    case Expr::Kind::Sub: return eval_unchecked(e.lhs()) - eval_unchecked(e.rhs());
    case Expr::Kind::Mul: return eval_unchecked(e.lhs()) * eval_unchecked(e.rhs());
  }
  return 0.0;
}

bool is_additive(const Expr& e) {
  return e.kind() == Expr::Kind::Add || e.kind() == Expr::Kind::Sub;
}

void print_into(const Expr& e, std::string& out) {
  if (e.kind() == Expr::Kind::Number) {
    out += format_real(e.number_value());
    return;
  }
  const bool mul = e.kind() == Expr::Kind::Mul;
  // Left operand: parenthesize additive under '*'. Right operand: any
  // non-leaf of equal or lower binding strength, to keep left-associativity.
  const bool paren_lhs = mul && is_additive(e.lhs());
  const bool paren_rhs = e.rhs().kind() != Expr::Kind::Number && (mul || is_additive(e.rhs()));
  auto operand = [&](const Expr& sub, bool paren) {
    if (paren) out += '(';
    print_into(sub, out);
    if (paren) out += ')';
  };
  operand(e.lhs(), paren_lhs);
  out += e.kind() == Expr::Kind::Add ? " + " : e.kind() == Expr::Kind::Sub ? " - " : " * ";
  operand(e.rhs(), paren_rhs);
}

}  // namespace

double eval_expr(const Expr& expr) {
  const double v = eval_unchecked(expr);
  if (!std::isfinite(v)) throw Error(code::kOverflow, "expression result is not finite");
  return v;
}

std::string print_expr(const Expr& expr) {
  std::string out;
  print_into(expr, out);
  return out;
}

}  // namespace vpt
