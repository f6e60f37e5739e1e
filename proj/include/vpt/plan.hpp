#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vpt/value.hpp"

namespace vpt {

/// Immutable arithmetic tree for `compute` domains. Subtrees are shared, so
/// copies are cheap and the tree is safe to read from several threads.
class Expr {
 public:
  enum class Kind { Number, Add, Sub, Mul };

  static Expr number(double v);
  static Expr binary(Kind op, Expr lhs, Expr rhs);

  Kind kind() const { return kind_; }
  double number_value() const { return number_; }
  const Expr& lhs() const { return *lhs_; }
  const Expr& rhs() const { return *rhs_; }
  /// Number of nested levels; a bare number has depth 1.
  int depth() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  Expr() = default;
  Kind kind_ = Kind::Number;
  double number_ = 0.0;
  std::shared_ptr<const Expr> lhs_;
  std::shared_ptr<const Expr> rhs_;
};

struct DefaultDomain {
  Value value;
  friend bool operator==(const DefaultDomain&, const DefaultDomain&) = default;
};

struct StepRefine {
  Value step;
  friend bool operator==(const StepRefine&, const StepRefine&) = default;
};

struct PointsRefine {
  Value points;
  friend bool operator==(const PointsRefine&, const PointsRefine&) = default;
};

struct RangeDomain {
  Value from;
  Value to;
  std::variant<std::monostate, StepRefine, PointsRefine> refine;
  friend bool operator==(const RangeDomain&, const RangeDomain&) = default;
};

struct SelectAnyDomain {
  std::vector<Value> values;
  std::vector<Value> defaults;
  friend bool operator==(const SelectAnyDomain&, const SelectAnyDomain&) = default;
};

struct SelectOneDomain {
  std::vector<Value> values;
  std::optional<Value> default_value;
  friend bool operator==(const SelectOneDomain&, const SelectOneDomain&) = default;
};

struct RandomDomain {
  Value from;
  Value to;
  std::optional<Value> points;
  friend bool operator==(const RandomDomain&, const RandomDomain&) = default;
};

struct ComputeDomain {
  Expr expr;
  friend bool operator==(const ComputeDomain&, const ComputeDomain&) = default;
};

struct JitpDomain {
  std::string raw;
  friend bool operator==(const JitpDomain&, const JitpDomain&) = default;
};

using Domain = std::variant<DefaultDomain, RangeDomain, SelectAnyDomain, SelectOneDomain,
                            RandomDomain, ComputeDomain, JitpDomain>;

enum class ParamType { Integer, Float, Text, File };
enum class ParamOrigin { FileDependent, FileIndependent, Imported };

std::string_view to_string(ParamType t);
std::string_view to_string(ParamOrigin o);
bool parse_param_type(std::string_view s, ParamType& out);
bool parse_param_origin(std::string_view s, ParamOrigin& out);

struct ParamDef {
  std::string name;
  std::optional<std::string> label;
  ParamType ptype = ParamType::Integer;
  Domain domain;
  ParamOrigin origin = ParamOrigin::Imported;
  friend bool operator==(const ParamDef&, const ParamDef&) = default;
};

enum class Scope { Root, Node };

struct Location {
  Scope scope = Scope::Node;
  std::string path;
  friend bool operator==(const Location&, const Location&) = default;
};

struct CopyCommand {
  Location src;
  Location dst;
  friend bool operator==(const CopyCommand&, const CopyCommand&) = default;
};

struct ExecuteCommand {
  bool on_node = false;
  std::string command_line;
  friend bool operator==(const ExecuteCommand&, const ExecuteCommand&) = default;
};

struct SubstituteCommand {
  std::string skeleton;  // may carry a `root:` / `node:` prefix
  std::string output;
  friend bool operator==(const SubstituteCommand&, const SubstituteCommand&) = default;
};

using TaskCommand = std::variant<CopyCommand, ExecuteCommand, SubstituteCommand>;

struct TaskDef {
  std::string name;
  std::vector<TaskCommand> commands;
  friend bool operator==(const TaskDef&, const TaskDef&) = default;
};

struct Plan {
  std::vector<ParamDef> params;
  std::vector<TaskDef> tasks;

  const ParamDef* find_param(std::string_view name) const;
  const TaskDef* find_task(std::string_view name) const;

  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Splits `root:x` / `node:x` / `x` into a Location. The path part is
/// returned as-is (possibly empty).
Location parse_location(std::string_view word);

}  // namespace vpt
