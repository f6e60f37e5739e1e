#include "vpt/plan.hpp"

#include <algorithm>
#include <array>

namespace vpt {

Expr Expr::number(double v) {
  Expr e;
  e.kind_ = Kind::Number;
  e.number_ = v;
  return e;
}

Expr Expr::binary(Kind op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind_ = op;
  e.lhs_ = std::make_shared<const Expr>(std::move(lhs));
  e.rhs_ = std::make_shared<const Expr>(std::move(rhs));
  return e;
}

int Expr::depth() const {
  if (kind_ == Kind::Number) return 1;
  return 1 + std::max(lhs_->depth(), rhs_->depth());
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ == Expr::Kind::Number) return a.number_ == b.number_;
  return *a.lhs_ == *b.lhs_ && *a.rhs_ == *b.rhs_;
}

namespace {
constexpr std::array<std::string_view, 4> kTypeNames{"integer", "float", "text", "file"};
constexpr std::array<std::string_view, 3> kOriginNames{"file_dependent", "file_independent",
                                                       "imported"};
}  // namespace

std::string_view to_string(ParamType t) { return kTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(ParamOrigin o) { return kOriginNames[static_cast<std::size_t>(o)]; }

bool parse_param_type(std::string_view s, ParamType& out) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == s) {
      out = static_cast<ParamType>(i);
      return true;
    }
  }
  return false;
}

bool parse_param_origin(std::string_view s, ParamOrigin& out) {
  for (std::size_t i = 0; i < kOriginNames.size(); ++i) {
    if (kOriginNames[i] == s) {
      out = static_cast<ParamOrigin>(i);
      return true;
    }
  }
  return false;
}

const ParamDef* Plan::find_param(std::string_view name) const {
  auto it = std::find_if(params.begin(), params.end(),
                         [&](const ParamDef& p) { return p.name == name; });
  return it == params.end() ? nullptr : &*it;
}

const TaskDef* Plan::find_task(std::string_view name) const {
  auto it = std::find_if(tasks.begin(), tasks.end(),
                         [&](const TaskDef& t) { return t.name == name; });
  return it == tasks.end() ? nullptr : &*it;
}

Location parse_location(std::string_view word) {
  if (word.starts_with("root:")) return {Scope::Root, std::string(word.substr(5))};
  if (word.starts_with("node:")) return {Scope::Node, std::string(word.substr(5))};
  return {Scope::Node, std::string(word)};
}

}  // namespace vpt
