#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "vpt/diagnostic.hpp"
#include "vpt/plan.hpp"

namespace vpt {

struct ParseResult {
  std::optional<Plan> plan;  // set iff there are no errors
  Diagnostics diagnostics;
  // Source extent of each statement, parallel to plan->params / plan->tasks.
  std::vector<Span> param_spans;
  std::vector<Span> task_spans;

  bool ok() const { return plan.has_value(); }
};

/// Parses plan source and runs the semantic checks of validate_plan, mapping
/// their findings onto statement spans. Parameters come back with
/// origin = Imported.
ParseResult parse_plan(std::string_view source);

/// Grammar and duplicate-name checks only. Lets callers hold a plan that is
/// syntactically fine but semantically wrong (e.g. to feed validate_plan).
ParseResult parse_plan_syntax(std::string_view source);

/// Parses a standalone `compute` expression. Throws Error(E_PARSE/E_LEX).
Expr parse_expr(std::string_view source);

}  // namespace vpt
