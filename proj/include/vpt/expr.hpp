#pragma once

#include <string>

#include "vpt/plan.hpp"

namespace vpt {

/// Evaluates with the tree's own precedence and associativity. Throws
/// Error(E_OVERFLOW) when the result is not finite.
double eval_expr(const Expr& expr);

/// Canonical spelling with single spaces around operators and only the
/// parentheses the tree shape needs.
std::string print_expr(const Expr& expr);

}  // namespace vpt
