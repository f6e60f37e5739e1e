#pragma once

#include <string>

#include "vpt/plan.hpp"

namespace vpt {

/// One canonical `parameter ...;` statement (no trailing newline).
std::string make_plan_step(const ParamDef& param);

/// `task <name>` ... `endtask`, commands indented by two spaces, trailing newline.
std::string print_task(const TaskDef& task);

/// One command line as it appears inside a task block (no indent or newline).
std::string print_command(const TaskCommand& command);

/// Canonical plan text: one statement per parameter, then the task blocks,
/// each preceded by a blank line. The empty plan prints as "".
std::string print_plan(const Plan& plan);

}  // namespace vpt
