#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vpt/diagnostic.hpp"
#include "vpt/plan.hpp"

namespace vpt {

/// Operator choices that replace interactive prompting.
struct SweepSettings {
  std::uint64_t seed = 0;
  // Parameter name -> chosen values for select anyof / select oneof.
  std::map<std::string, std::vector<Value>> overrides;
};

/// The explicit, ordered list of values one parameter takes.
struct ValueAxis {
  std::string name;
  ValueKind kind = ValueKind::Integer;
  std::vector<Value> values;

  bool swept() const { return values.size() > 1; }
  friend bool operator==(const ValueAxis&, const ValueAxis&) = default;
};

/// Checks one parameter against the type/domain compatibility rules.
/// Diagnostics carry empty spans; parse_plan maps them onto the source.
Diagnostics validate_param(const ParamDef& param);
Diagnostics validate_task(const TaskDef& task);

/// Empty iff the plan is semantically valid.
Diagnostics validate_plan(const Plan& plan);

/// Checks that every override names a select parameter of the plan and only
/// picks declared values. Throws Error(E_OVERRIDE).
void check_overrides(const Plan& plan, const SweepSettings& settings);

/// Materializes a parameter's axis. Throws Error(E_NO_SELECTION, E_OVERRIDE,
/// E_OVERFLOW, E_TYPE).
ValueAxis expand_domain(const ParamDef& param, const SweepSettings& settings);

/// Length of expand_domain(param, settings).values, computed without
/// materializing the axis.
std::uint64_t axis_cardinality(const ParamDef& param, const SweepSettings& settings);

/// Value kind a parameter's axis carries.
ValueKind axis_kind(const ParamDef& param);

}  // namespace vpt
