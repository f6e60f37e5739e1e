#include "vpt/param_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "vpt/expr.hpp"
#include "vpt/prng.hpp"

namespace vpt {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::uint64_t kMaxCount = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
constexpr double kComputeIntegralTolerance = 1e-9;
constexpr double kFloatStepSlack = 1e-9;

bool is_numeric_type(ParamType t) { return t == ParamType::Integer || t == ParamType::Float; }

bool has_nul(std::string_view s) { return s.find('\0') != std::string_view::npos; }

bool literal_matches(const Value& v, ParamType t) {
  switch (t) {
    case ParamType::Integer: return v.kind() == ValueKind::Integer;
    case ParamType::Float: return v.kind() == ValueKind::Real;
    case ParamType::Text: return v.kind() == ValueKind::Text && !has_nul(v.as_string());
    case ParamType::File: return v.kind() == ValueKind::File && !has_nul(v.as_string());
  }
  return false;
}

std::string describe_literal(const Value& v) {
  return format_literal(v) + " (" + std::string(to_string(v.kind())) + ")";
}

class ParamChecker {
 public:
  explicit ParamChecker(const ParamDef& p) : p_(p) {}

  Diagnostics run() {
    if (!is_identifier(p_.name))
      err(code::kBadName, "'" + p_.name + "' is not a valid parameter name");
    if (p_.label && has_nul(*p_.label)) err(code::kType, "label contains a NUL byte");
    std::visit(Overloaded{
                   [&](const DefaultDomain& d) { literal(d.value, "default value"); },
                   [&](const RangeDomain& d) { range(d); },
                   [&](const SelectAnyDomain& d) { select(d.values, d.defaults); },
                   [&](const SelectOneDomain& d) {
                     std::vector<Value> defaults;
                     if (d.default_value) defaults.push_back(*d.default_value);
                     select(d.values, defaults);
                   },
                   [&](const RandomDomain& d) { random(d); },
                   [&](const ComputeDomain& d) { compute(d); },
                   [&](const JitpDomain& d) {
                     if (has_nul(d.raw)) err(code::kType, "jitp expression contains a NUL byte");
                   },
               },
               p_.domain);
    return std::move(diags_);
  }

 private:
  void err(std::string_view c, std::string message) {
    diags_.push_back(make_error(c, "parameter '" + p_.name + "': " + std::move(message)));
  }

  bool literal(const Value& v, std::string_view what) {
    if (literal_matches(v, p_.ptype)) return true;
    err(code::kType, std::string(what) + " " + describe_literal(v) + " does not match type " +
                         std::string(to_string(p_.ptype)));
    return false;
  }

  bool numeric_type(std::string_view domain) {
    if (is_numeric_type(p_.ptype)) return true;
    err(code::kType, std::string(domain) + " requires an integer or float parameter, not " +
                         std::string(to_string(p_.ptype)));
    return false;
  }

  bool count(const Value& v, std::string_view what) {
    if (v.kind() != ValueKind::Integer || v.as_integer() < 1) {
      err(code::kBadPoints, std::string(what) + " must be an integer >= 1, got " + format_literal(v));
      return false;
    }
    return true;
  }

  void range(const RangeDomain& d) {
    if (!numeric_type("range")) return;
    const bool bounds_ok = literal(d.from, "range start") & literal(d.to, "range end");
    if (!bounds_ok) return;
    if (d.from.as_number() > d.to.as_number() ||
        (p_.ptype == ParamType::Integer && d.from.as_integer() > d.to.as_integer())) {
      err(code::kEmptyRange,
          "range from " + format_literal(d.from) + " to " + format_literal(d.to) + " is empty");
      return;
    }
    if (const auto* s = std::get_if<StepRefine>(&d.refine)) {
      if (!literal(s->step, "step")) return;
      if (s->step.as_number() <= 0)
        err(code::kBadStep, "step must be > 0, got " + format_literal(s->step));
    } else if (const auto* pts = std::get_if<PointsRefine>(&d.refine)) {
      if (!count(pts->points, "points")) return;
      const std::int64_t n = pts->points.as_integer();
      if (p_.ptype == ParamType::Integer && n > 1) {
        const std::uint64_t width = static_cast<std::uint64_t>(d.to.as_integer()) -
                                    static_cast<std::uint64_t>(d.from.as_integer());
        if (width % static_cast<std::uint64_t>(n - 1) != 0)
          err(code::kBadPoints, "integer range " + format_literal(d.from) + ".." +
                                    format_literal(d.to) + " cannot be split into " +
                                    std::to_string(n) + " equally spaced points");
      }
    } else if (p_.ptype == ParamType::Float) {
      err(code::kBadStep, "float range needs an explicit step or points clause");
    }
  }

  void select(const std::vector<Value>& values, const std::vector<Value>& defaults) {
    if (values.empty()) {
      err(code::kType, "select needs at least one value");
      return;
    }
    for (const Value& v : values) literal(v, "select value");
    for (const Value& d : defaults) {
      if (!literal(d, "default")) continue;
      if (std::find(values.begin(), values.end(), d) == values.end())
        err(code::kBadDefault, "default " + format_literal(d) + " is not one of the values");
    }
  }

  void random(const RandomDomain& d) {
    if (!numeric_type("random")) return;
    const bool bounds_ok = literal(d.from, "random start") & literal(d.to, "random end");
    if (bounds_ok && (d.from.as_number() > d.to.as_number() ||
                      (p_.ptype == ParamType::Integer && d.from.as_integer() > d.to.as_integer())))
      err(code::kEmptyRange,
          "random from " + format_literal(d.from) + " to " + format_literal(d.to) + " is empty");
    if (d.points) count(*d.points, "points");
  }

  void compute(const ComputeDomain& d) {
    if (!numeric_type("compute")) return;
    try {
      coerce_compute(eval_expr(d.expr), p_.ptype);
    } catch (const Error& e) {
      err(e.code(), e.diagnostic().message);
    }
  }

 public:
  static Value coerce_compute(double v, ParamType ptype) {
    if (ptype == ParamType::Float) return Value::real(v);
    const double r = std::round(v);
    if (std::fabs(v - r) > kComputeIntegralTolerance)
      throw Error(code::kType, "compute result " + format_real(v) + " is not an integer");
    if (r < -9223372036854775808.0 || r >= 9223372036854775808.0)
      throw Error(code::kOverflow, "compute result " + format_real(v) + " exceeds integer range");
    return Value::integer(static_cast<std::int64_t>(r));
  }

 private:
  const ParamDef& p_;
  Diagnostics diags_;
};

std::uint64_t integer_width(const RangeDomain& d) {
  return static_cast<std::uint64_t>(d.to.as_integer()) -
         static_cast<std::uint64_t>(d.from.as_integer());
}

std::int64_t offset_integer(std::int64_t base, std::uint64_t delta) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(base) + delta);
}

// Number of values from + i*s (i = 0, 1, ...) not exceeding to + s*slack.
std::uint64_t float_step_count(double from, double to, double step) {
  const double limit = to + step * kFloatStepSlack;
  const double estimate = std::floor((to - from) / step);
  if (!(estimate < 9.0e18))
    throw Error(code::kOverflow, "float range produces too many values");
  std::uint64_t n = static_cast<std::uint64_t>(estimate) + 1;
  while (n > 1 && from + static_cast<double>(n - 1) * step > limit) --n;
  while (from + static_cast<double>(n) * step <= limit) ++n;
  return n;
}

std::uint64_t checked_count(std::uint64_t n) {
  if (n > kMaxCount) throw Error(code::kOverflow, "axis has more than 2^63-1 values");
  return n;
}

struct RangePlan {
  bool integer;
  std::uint64_t count;
  // integer stepping
  std::uint64_t int_step = 1;
  // float stepping (step > 0) or points interpolation (step == 0)
  double float_step = 0.0;
};

RangePlan plan_range(const ParamDef& p, const RangeDomain& d) {
  RangePlan rp{p.ptype == ParamType::Integer, 0};
  if (const auto* pts = std::get_if<PointsRefine>(&d.refine)) {
    rp.count = static_cast<std::uint64_t>(pts->points.as_integer());
    if (rp.integer && rp.count > 1) rp.int_step = integer_width(d) / (rp.count - 1);
    return rp;
  }
  if (rp.integer) {
    const auto* s = std::get_if<StepRefine>(&d.refine);
    rp.int_step = s ? static_cast<std::uint64_t>(s->step.as_integer()) : 1;
    const std::uint64_t q = integer_width(d) / rp.int_step;
    if (q == std::numeric_limits<std::uint64_t>::max())
      throw Error(code::kOverflow, "axis has more than 2^63-1 values");
    rp.count = checked_count(q + 1);
    return rp;
  }
  rp.float_step = std::get<StepRefine>(d.refine).step.as_real();
  rp.count = checked_count(float_step_count(d.from.as_real(), d.to.as_real(), rp.float_step));
  return rp;
}

void ensure_valid(const ParamDef& p) {
  Diagnostics diags = validate_param(p);
  if (has_errors(diags)) throw Error(diags.front());
}

// Declared values that also appear in `chosen`, in declaration order.
std::vector<Value> pick(const std::vector<Value>& declared, const std::vector<Value>& chosen) {
  std::vector<Value> out;
  for (const Value& v : declared)
    if (std::find(chosen.begin(), chosen.end(), v) != chosen.end()) out.push_back(v);
  return out;
}

const std::vector<Value>* find_override(const ParamDef& p, const SweepSettings& s) {
  auto it = s.overrides.find(p.name);
  return it == s.overrides.end() ? nullptr : &it->second;
}

void check_override_values(const ParamDef& p, const std::vector<Value>& declared,
                           const std::vector<Value>& chosen) {
  if (chosen.empty())
    throw Error(code::kOverride, "override for '" + p.name + "' selects no values");
  for (const Value& v : chosen)
    if (std::find(declared.begin(), declared.end(), v) == declared.end())
      throw Error(code::kOverride,
                  "override " + format_literal(v) + " is not a declared value of '" + p.name + "'");
}

std::vector<Value> select_axis(const ParamDef& p, const SweepSettings& s) {
  const std::vector<Value>* chosen = find_override(p, s);
  if (const auto* any = std::get_if<SelectAnyDomain>(&p.domain)) {
    if (chosen) {
      check_override_values(p, any->values, *chosen);
      return pick(any->values, *chosen);
    }
    return any->defaults.empty() ? any->values : pick(any->values, any->defaults);
  }
  const auto& one = std::get<SelectOneDomain>(p.domain);
  if (chosen) {
    check_override_values(p, one.values, *chosen);
    if (chosen->size() != 1)
      throw Error(code::kOverride, "select oneof parameter '" + p.name + "' takes exactly one value");
    return {chosen->front()};
  }
  if (!one.default_value)
    throw Error(code::kNoSelection,
                "parameter '" + p.name + "' has no default and no override selects a value");
  return {*one.default_value};
}

bool is_select(const Domain& d) {
  return std::holds_alternative<SelectAnyDomain>(d) || std::holds_alternative<SelectOneDomain>(d);
}

}  // namespace

Diagnostics validate_param(const ParamDef& param) { return ParamChecker(param).run(); }

Diagnostics validate_task(const TaskDef& task) {
  Diagnostics diags;
  auto err = [&](std::size_t index, std::string message) {
    diags.push_back(make_error(code::kTask, "task '" + task.name + "' command " +
                                                std::to_string(index) + ": " + std::move(message)));
  };
  if (!is_identifier(task.name))
    diags.push_back(make_error(code::kBadName, "'" + task.name + "' is not a valid task name"));
  auto bad_path = [](std::string_view path) { return path.empty() || has_nul(path); };
  for (std::size_t i = 0; i < task.commands.size(); ++i) {
    std::visit(Overloaded{
                   [&](const CopyCommand& c) {
                     if (bad_path(c.src.path) || bad_path(c.dst.path))
                       err(i, "copy paths must be non-empty and NUL-free");
                   },
                   [&](const ExecuteCommand& c) {
                     const std::string& line = c.command_line;
                     auto blank = [](char ch) {
                       return ch == ' ' || ch == '\t' || ch == '\v' || ch == '\f' || ch == '\r';
                     };
                     if (line.empty() || blank(line.front()) || blank(line.back()) ||
                         line.find_first_of(std::string_view("\n\r\0", 3)) != std::string::npos)
                       err(i, "command line must be a non-empty single trimmed line");
                   },
                   [&](const SubstituteCommand& c) {
                     if (bad_path(parse_location(c.skeleton).path) ||
                         bad_path(parse_location(c.output).path))
                       err(i, "substitute paths must be non-empty and NUL-free");
                   },
               },
               task.commands[i]);
  }
  return diags;
}

Diagnostics validate_plan(const Plan& plan) {
  Diagnostics diags;
  std::set<std::string> names;
  for (const ParamDef& p : plan.params) {
    if (!names.insert(p.name).second)
      diags.push_back(make_error(code::kDupParam, "duplicate parameter '" + p.name + "'"));
    Diagnostics d = validate_param(p);
    diags.insert(diags.end(), d.begin(), d.end());
  }
  std::set<std::string> tasks;
  for (const TaskDef& t : plan.tasks) {
    if (!tasks.insert(t.name).second)
      diags.push_back(make_error(code::kDupTask, "duplicate task '" + t.name + "'"));
    Diagnostics d = validate_task(t);
    diags.insert(diags.end(), d.begin(), d.end());
  }
  return diags;
}

void check_overrides(const Plan& plan, const SweepSettings& settings) {
  for (const auto& [name, values] : settings.overrides) {
    const ParamDef* p = plan.find_param(name);
    if (!p) throw Error(code::kOverride, "override names unknown parameter '" + name + "'");
    if (!is_select(p->domain))
      throw Error(code::kOverride, "parameter '" + name + "' is not a select parameter");
    (void)select_axis(*p, settings);
  }
}

ValueKind axis_kind(const ParamDef& param) {
  if (std::holds_alternative<JitpDomain>(param.domain)) return ValueKind::Text;
  switch (param.ptype) {
    case ParamType::Integer: return ValueKind::Integer;
    case ParamType::Float: return ValueKind::Real;
    case ParamType::Text: return ValueKind::Text;
    case ParamType::File: return ValueKind::File;
  }
  return ValueKind::Text;
}

ValueAxis expand_domain(const ParamDef& param, const SweepSettings& settings) {
  ensure_valid(param);
  if (find_override(param, settings) && !is_select(param.domain))
    throw Error(code::kOverride, "parameter '" + param.name + "' is not a select parameter");

  ValueAxis axis{param.name, axis_kind(param), {}};
  std::visit(
      Overloaded{
          [&](const DefaultDomain& d) { axis.values.push_back(d.value); },
          [&](const RangeDomain& d) {
            const RangePlan rp = plan_range(param, d);
            axis.values.reserve(rp.count);
            if (rp.integer) {
              for (std::uint64_t i = 0; i < rp.count; ++i)
                axis.values.push_back(
                    Value::integer(offset_integer(d.from.as_integer(), i * rp.int_step)));
              return;
            }
            const double from = d.from.as_real();
            const double to = d.to.as_real();
            if (rp.float_step > 0) {
              for (std::uint64_t i = 0; i < rp.count; ++i)
                axis.values.push_back(Value::real(from + static_cast<double>(i) * rp.float_step));
              return;
            }
            if (rp.count == 1) {
              axis.values.push_back(Value::real(from));
              return;
            }
            const double last = static_cast<double>(rp.count - 1);
            for (std::uint64_t i = 0; i < rp.count; ++i)
              axis.values.push_back(Value::real(std::lerp(from, to, static_cast<double>(i) / last)));
          },
          [&](const SelectAnyDomain&) { axis.values = select_axis(param, settings); },
          [&](const SelectOneDomain&) { axis.values = select_axis(param, settings); },
          [&](const RandomDomain& d) {
            const std::int64_t n = d.points ? d.points->as_integer() : 1;
            Xorshift64Star rng(settings.seed);
            axis.values.reserve(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i) {
              const double u = rng.next_unit();
              if (param.ptype == ParamType::Float) {
                const double lo = d.from.as_real();
                axis.values.push_back(Value::real(lo + u * (d.to.as_real() - lo)));
              } else {
                const std::int64_t lo = d.from.as_integer();
                const std::uint64_t width =
                    static_cast<std::uint64_t>(d.to.as_integer()) - static_cast<std::uint64_t>(lo);
                const double span = static_cast<double>(width) + 1.0;
                double k = std::floor(u * span);
                std::uint64_t offset = k >= static_cast<double>(width)
                                           ? width
                                           : static_cast<std::uint64_t>(k);
                axis.values.push_back(Value::integer(offset_integer(lo, offset)));
              }
            }
          },
          [&](const ComputeDomain& d) {
            axis.values.push_back(ParamChecker::coerce_compute(eval_expr(d.expr), param.ptype));
          },
          [&](const JitpDomain& d) { axis.values.push_back(Value::text(d.raw)); },
      },
      param.domain);
  return axis;
}

std::uint64_t axis_cardinality(const ParamDef& param, const SweepSettings& settings) {
  ensure_valid(param);
  if (find_override(param, settings) && !is_select(param.domain))
    throw Error(code::kOverride, "parameter '" + param.name + "' is not a select parameter");
  return std::visit(
      Overloaded{
          [&](const RangeDomain& d) -> std::uint64_t { return plan_range(param, d).count; },
          [&](const SelectAnyDomain&) -> std::uint64_t { return select_axis(param, settings).size(); },
          [&](const SelectOneDomain&) -> std::uint64_t { return select_axis(param, settings).size(); },
          [&](const RandomDomain& d) -> std::uint64_t {
            return d.points ? static_cast<std::uint64_t>(d.points->as_integer()) : 1;
          },
          [&](const auto&) -> std::uint64_t { return 1; },
      },
      param.domain);
}

}  // namespace vpt
