#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "vpt/param_model.hpp"
#include "vpt/parser.hpp"

using namespace vpt;

namespace {

ParamDef param_of(std::string_view src) {
  ParseResult r = parse_plan(src);
  REQUIRE_MESSAGE(r.ok(), src);
  REQUIRE(r.plan->params.size() == 1);
  return r.plan->params[0];
}

std::vector<std::string> codes_of(std::string_view src) {
  std::vector<std::string> out;
  for (const Diagnostic& d : parse_plan(src).diagnostics) out.push_back(d.code);
  return out;
}

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("validate_plan examples") {
  CHECK(codes_of("parameter lig integer range from 1 to 2000 step 1;").empty());
  CHECK(codes_of("parameter x integer range from 5 to 3 step 1;") ==
        std::vector<std::string>{"E_EMPTY_RANGE"});
  CHECK(codes_of("parameter t text range from 1 to 2;") == std::vector<std::string>{"E_TYPE"});
}

TEST_CASE("compatibility table") {
  CHECK(codes_of("parameter a integer range from 1 to 5 step 0;") ==
        std::vector<std::string>{"E_BAD_STEP"});
  CHECK(codes_of("parameter a float range from 0 to 1;") == std::vector<std::string>{"E_BAD_STEP"});
  CHECK(codes_of("parameter a integer range from 0 to 10 points 4;") ==
        std::vector<std::string>{"E_BAD_POINTS"});
  CHECK(codes_of("parameter a integer range from 0 to 9 points 4;").empty());
  CHECK(codes_of("parameter a float range from 0 to 1 points 0;") ==
        std::vector<std::string>{"E_BAD_POINTS"});
  CHECK(codes_of("parameter a file random from 0 to 1;") == std::vector<std::string>{"E_TYPE"});
  CHECK(codes_of("parameter a text compute 1 + 2;") == std::vector<std::string>{"E_TYPE"});
  CHECK(codes_of("parameter a integer compute 1.5 * 1;") == std::vector<std::string>{"E_TYPE"});
  CHECK(codes_of("parameter a text select oneof x y default z;") ==
        std::vector<std::string>{"E_BAD_DEFAULT"});
  CHECK(codes_of("parameter a integer select anyof 1 \"x\";") == std::vector<std::string>{"E_TYPE"});
  CHECK(codes_of("parameter a file jitp \"anything at all\";").empty());
  CHECK(codes_of("parameter a integer default 1;\nparameter a integer default 2;") ==
        std::vector<std::string>{"E_DUP_PARAM"});
}

TEST_CASE("expand_domain examples") {
  const SweepSettings none;
  const ValueAxis lig = expand_domain(param_of("parameter lig integer range from 1 to 2000 step 1;"), none);
  REQUIRE(lig.values.size() == 2000);
  CHECK(lig.values.front() == Value::integer(1));
  CHECK(lig.values.back() == Value::integer(2000));
  CHECK(lig.swept());

  const ValueAxis d = expand_domain(param_of("parameter d integer default 42;"), none);
  CHECK(d.values == std::vector<Value>{Value::integer(42)});
  CHECK_FALSE(d.swept());

  const ValueAxis f = expand_domain(param_of("parameter t float range from 0 to 1 points 3;"), none);
  CHECK(f.values == std::vector<Value>{Value::real(0), Value::real(0.5), Value::real(1)});

  const ParamDef rnd = param_of("parameter r float random from 0 to 1 points 5;");
  const ValueAxis r1 = expand_domain(rnd, none);
  REQUIRE(r1.values.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(r1.values[i].as_real() == testing::kRandomUnitSeed0[i]);
  CHECK(expand_domain(rnd, none) == r1);
}

TEST_CASE("random axes match the recorded generator output") {
  SweepSettings s;
  s.seed = 42;
  const ValueAxis die = expand_domain(param_of("parameter d integer random from 1 to 6 points 5;"), s);
  std::vector<std::int64_t> got;
  for (const Value& v : die.values) got.push_back(v.as_integer());
  CHECK(got == testing::kRandomDieSeed42);

  s.seed = 7;
  const ValueAxis sym = expand_domain(param_of("parameter x float random from -2.5 to 2.5 points 3;"), s);
  REQUIRE(sym.values.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(sym.values[i].as_real() == testing::kRandomSymmetricSeed7[i]);

  // No points clause draws once.
  CHECK(expand_domain(param_of("parameter x float random from 0 to 1;"), {}).values.size() == 1);
}

TEST_CASE("range forms") {
  const SweepSettings none;
  CHECK(expand_domain(param_of("parameter a integer range from 0 to 10 step 3;"), none).values ==
        std::vector<Value>{Value::integer(0), Value::integer(3), Value::integer(6), Value::integer(9)});
  CHECK(expand_domain(param_of("parameter a integer range from 2 to 4;"), none).values.size() == 3);
  CHECK(expand_domain(param_of("parameter a integer range from 0 to 9 points 4;"), none).values ==
        std::vector<Value>{Value::integer(0), Value::integer(3), Value::integer(6), Value::integer(9)});
  CHECK(expand_domain(param_of("parameter a integer range from 7 to 7 points 1;"), none).values ==
        std::vector<Value>{Value::integer(7)});
  // 0.1 steps accumulate error; the tolerance keeps the endpoint.
  const ValueAxis f = expand_domain(param_of("parameter a float range from 0 to 0.3 step 0.1;"), none);
  CHECK(f.values.size() == 4);
}

TEST_CASE("selections and overrides") {
  const ParamDef any = param_of("parameter m text select anyof a b c default c a;");
  CHECK(expand_domain(any, {}).values == std::vector<Value>{Value::text("a"), Value::text("c")});
  const ParamDef all = param_of("parameter m text select anyof a b c;");
  CHECK(expand_domain(all, {}).values.size() == 3);

  SweepSettings s;
  s.overrides["m"] = {Value::text("b")};
  CHECK(expand_domain(any, s).values == std::vector<Value>{Value::text("b")});
  s.overrides["m"] = {Value::text("zzz")};
  CHECK(error_code([&] { expand_domain(any, s); }) == "E_OVERRIDE");

  const ParamDef one = param_of("parameter o integer select oneof 1 2 3;");
  CHECK(error_code([&] { expand_domain(one, {}); }) == "E_NO_SELECTION");
  SweepSettings pick;
  pick.overrides["o"] = {Value::integer(2)};
  CHECK(expand_domain(one, pick).values == std::vector<Value>{Value::integer(2)});
  pick.overrides["o"] = {Value::integer(2), Value::integer(3)};
  CHECK(error_code([&] { expand_domain(one, pick); }) == "E_OVERRIDE");

  Plan plan;
  plan.params.push_back(one);
  SweepSettings stray;
  stray.overrides["nope"] = {Value::integer(1)};
  CHECK(error_code([&] { check_overrides(plan, stray); }) == "E_OVERRIDE");
}

TEST_CASE("compute and jitp") {
  CHECK(expand_domain(param_of("parameter c integer compute 2 * (3 + 4);"), {}).values ==
        std::vector<Value>{Value::integer(14)});
  CHECK(expand_domain(param_of("parameter c float compute 1 - 0.25;"), {}).values ==
        std::vector<Value>{Value::real(0.75)});
  const ValueAxis j = expand_domain(param_of("parameter j text jitp \"$lig * 2\";"), {});
  REQUIRE(j.values.size() == 1);
  CHECK(j.values[0].as_string() == "$lig * 2");
}

TEST_CASE("axis_cardinality examples") {
  CHECK(axis_cardinality(param_of("parameter lig integer range from 1 to 2000 step 1;"), {}) == 2000);
  CHECK(axis_cardinality(param_of("parameter o integer select oneof 1 2 default 2;"), {}) == 1);
  std::uint64_t brute = 0;
  for (int v = 0; v <= 10; v += 3) ++brute;
  CHECK(axis_cardinality(param_of("parameter a integer range from 0 to 10 step 3;"), {}) == brute);
  CHECK(error_code([] {
          axis_cardinality(param_of("parameter a integer range from -9223372036854775807 to 9223372036854775807;"), {});
        }) == "E_OVERFLOW");
}

TEST_CASE("generated parameters satisfy the axis properties") {
  testing::Gen gen(2024);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const ParamDef p = gen.param("p");
    if (!validate_param(p).empty()) continue;
    SweepSettings s;
    s.seed = static_cast<std::uint64_t>(gen.between(0, 1 << 20));
    ValueAxis axis;
    try {
      axis = expand_domain(p, s);
    } catch (const Error& e) {
      CHECK(e.code() == "E_NO_SELECTION");
      continue;
    }
    ++checked;
    CHECK(axis_cardinality(p, s) == axis.values.size());
    CHECK_FALSE(axis.values.empty());
    CHECK(expand_domain(p, s) == axis);
    for (const Value& v : axis.values) CHECK(v.kind() == axis_kind(p));

    if (const auto* r = std::get_if<RangeDomain>(&p.domain)) {
      if (p.ptype == ParamType::Integer) {
        const std::int64_t from = r->from.as_integer(), to = r->to.as_integer();
        for (std::size_t k = 0; k < axis.values.size(); ++k) {
          const std::int64_t v = axis.values[k].as_integer();
          CHECK(v >= from);
          CHECK(v <= to);
          if (k > 0) CHECK(v > axis.values[k - 1].as_integer());
        }
        if (const auto* st = std::get_if<StepRefine>(&r->refine))
          for (const Value& v : axis.values) CHECK((v.as_integer() - from) % st->step.as_integer() == 0);
        if (std::holds_alternative<PointsRefine>(r->refine)) CHECK(axis.values.back() == r->to);
      } else if (std::holds_alternative<PointsRefine>(r->refine) && axis.values.size() > 1) {
        const double from = r->from.as_real(), to = r->to.as_real();
        CHECK(axis.values.front().as_real() == from);
        CHECK(std::fabs(axis.values.back().as_real() - to) <= 1e-12 * std::max(1.0, std::fabs(to)));
        const double d0 = axis.values[1].as_real() - axis.values[0].as_real();
        for (std::size_t k = 2; k < axis.values.size(); ++k) {
          const double dk = axis.values[k].as_real() - axis.values[k - 1].as_real();
          CHECK(std::fabs(dk - d0) <= 1e-12 * std::max({1.0, std::fabs(from), std::fabs(to)}));
        }
      }
    }
    if (const auto* r = std::get_if<RandomDomain>(&p.domain)) {
      for (const Value& v : axis.values) {
        CHECK(v.as_number() >= r->from.as_number());
        CHECK(v.as_number() <= r->to.as_number());
      }
    }
    auto sublist = [&](const std::vector<Value>& declared) {
      std::size_t at = 0;
      for (const Value& v : axis.values) {
        while (at < declared.size() && !(declared[at] == v)) ++at;
        CHECK(at < declared.size());
        ++at;
      }
    };
    if (const auto* a = std::get_if<SelectAnyDomain>(&p.domain)) sublist(a->values);
    if (const auto* o = std::get_if<SelectOneDomain>(&p.domain)) sublist(o->values);
  }
  CHECK(checked > 500);
}
