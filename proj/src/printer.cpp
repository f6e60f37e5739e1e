#include "vpt/printer.hpp"

#include <algorithm>

#include "vpt/expr.hpp"

namespace vpt {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append_values(std::string& out, const std::vector<Value>& values) {
  for (const Value& v : values) {
    out += ' ';
    out += format_literal(v);
  }
}

std::string print_domain(const Domain& domain) {
  return std::visit(
      Overloaded{
          [](const DefaultDomain& d) { return "default " + format_literal(d.value); },
          [](const RangeDomain& d) {
            std::string out = "range from " + format_literal(d.from) + " to " +
                              format_literal(d.to);
            if (const auto* s = std::get_if<StepRefine>(&d.refine))
              out += " step " + format_literal(s->step);
            else if (const auto* p = std::get_if<PointsRefine>(&d.refine))
              out += " points " + format_literal(p->points);
            return out;
          },
          [](const SelectAnyDomain& d) {
            std::string out = "select anyof";
            append_values(out, d.values);
            if (!d.defaults.empty()) {
              out += " default";
              append_values(out, d.defaults);
            }
            return out;
          },
          [](const SelectOneDomain& d) {
            std::string out = "select oneof";
            append_values(out, d.values);
            if (d.default_value) out += " default " + format_literal(*d.default_value);
            return out;
          },
          [](const RandomDomain& d) {
            std::string out = "random from " + format_literal(d.from) + " to " +
                              format_literal(d.to);
            if (d.points) out += " points " + format_literal(*d.points);
            return out;
          },
          [](const ComputeDomain& d) { return "compute " + print_expr(d.expr); },
          [](const JitpDomain& d) { return "jitp " + quote_string(d.raw); },
      },
      domain);
}

bool needs_quoting(std::string_view word) {
  if (word.empty() || word.front() == '"' || word.front() == '#') return true;
  return std::any_of(word.begin(), word.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\v' || c == '\f' || c == '\r' || c == '\n' ||
           c == '\\';
  });
}

std::string print_word(std::string_view word) {
  return needs_quoting(word) ? quote_string(word) : std::string(word);
}

std::string print_location(const Location& loc) {
  return print_word((loc.scope == Scope::Root ? "root:" : "node:") + loc.path);
}

}  // namespace

std::string make_plan_step(const ParamDef& param) {
  std::string out = "parameter " + param.name;
  if (param.label) out += " label " + quote_string(*param.label);
  out += ' ';
  out += to_string(param.ptype);
  out += ' ';
  out += print_domain(param.domain);
  out += ';';
  return out;
}

std::string print_command(const TaskCommand& command) {
  return std::visit(
      Overloaded{
          [](const CopyCommand& c) {
            return "copy " + print_location(c.src) + ' ' + print_location(c.dst);
          },
          [](const ExecuteCommand& c) {
            return std::string(c.on_node ? "node:execute " : "execute ") + c.command_line;
          },
          [](const SubstituteCommand& c) {
            return "substitute " + print_word(c.skeleton) + ' ' + print_word(c.output);
          },
      },
      command);
}

std::string print_task(const TaskDef& task) {
  std::string out = "task " + task.name + '\n';
  for (const TaskCommand& c : task.commands) out += "  " + print_command(c) + '\n';
  out += "endtask\n";
  return out;
}

std::string print_plan(const Plan& plan) {
  std::string out;
  for (const ParamDef& p : plan.params) out += make_plan_step(p) + '\n';
  for (const TaskDef& t : plan.tasks) {
    if (!out.empty()) out += '\n';
    out += print_task(t);
  }
  return out;
}

}  // namespace vpt
