#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "vpt/jobgen.hpp"
#include "vpt/parser.hpp"

using namespace vpt;

namespace {

Plan plan_of(std::string_view src) {
  ParseResult r = parse_plan(src);
  REQUIRE_MESSAGE(r.ok(), src);
  return *r.plan;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const char* const kDocking = "parameter lig label \"ligand\" integer range from 1 to 2000 step 1;\n";

}  // namespace

TEST_CASE("enumerate_indices examples") {
  const std::vector<std::uint64_t> c32 = {3, 2};
  CHECK(enumerate_indices(c32) ==
        std::vector<IndexVector>{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}, {2, 1}});
  CHECK(enumerate_indices(std::vector<std::uint64_t>{}) == std::vector<IndexVector>{IndexVector{}});
  CHECK(enumerate_indices(std::vector<std::uint64_t>{5}) ==
        std::vector<IndexVector>{{0}, {1}, {2}, {3}, {4}});
}

TEST_CASE("enumeration matches the nested-loop oracle exhaustively") {
  std::size_t vectors = 0;
  for (std::size_t axes = 0; axes <= 4; ++axes) {
    std::vector<std::uint64_t> counts(axes, 1);
    while (true) {
      const auto got = enumerate_indices(counts);
      CHECK(got == testing::nested_loop_indices(counts));
      CHECK(std::is_sorted(got.begin(), got.end()));
      CHECK(std::set<IndexVector>(got.begin(), got.end()).size() == got.size());
      ++vectors;
      std::size_t k = 0;
      while (k < axes && counts[k] == 5) counts[k++] = 1;
      if (k == axes) break;
      ++counts[k];
    }
  }
  CHECK(vectors == 1 + 5 + 25 + 125 + 625);
}

TEST_CASE("index_product overflow") {
  const std::vector<std::uint64_t> huge = {1ULL << 32, 1ULL << 32};
  CHECK_THROWS_AS(index_product(huge), Error);
  const std::vector<std::uint64_t> max = {9223372036854775807ULL};
  CHECK(index_product(max) == 9223372036854775807ULL);
}

TEST_CASE("job ids are zero-padded") {
  CHECK(job_id(1, 2000) == "j0001");
  CHECK(job_id(2000, 2000) == "j2000");
  CHECK(job_id(1, 1) == "j1");
  CHECK(job_id(7, 10) == "j07");
}

TEST_CASE("docking plan yields 2000 jobs") {
  const Plan plan = plan_of(kDocking);
  CHECK(count_jobs(plan, {}) == 2000);
  const RunSpec rs = make_run_spec(plan, {});
  REQUIRE(rs.jobs.size() == 2000);
  CHECK(rs.jobs.front().id == "j0001");
  CHECK(*rs.jobs.front().find("lig") == Value::integer(1));
  CHECK(rs.jobs.back().id == "j2000");
  CHECK(*rs.jobs.back().find("lig") == Value::integer(2000));

  const auto text = lines_of(render_run_spec(rs, RunSpecFormat::TextV1));
  CHECK(text.size() == 2002);
  CHECK(text[0] == "runspec v1 seed=0");
  CHECK(text[2] == "job j0001 lig=1");
}

TEST_CASE("row-major jobs with unswept parameters bound everywhere") {
  const Plan plan = plan_of(
      "parameter a integer range from 1 to 3;\n"
      "parameter k text default \"fixed\";\n"
      "parameter b text select anyof x y;\n");
  const RunSpec rs = make_run_spec(plan, {});
  REQUIRE(rs.jobs.size() == 6);
  const std::vector<std::pair<std::int64_t, std::string>> expect = {
      {1, "x"}, {1, "y"}, {2, "x"}, {2, "y"}, {3, "x"}, {3, "y"}};
  for (std::size_t i = 0; i < 6; ++i) {
    const JobSpec& j = rs.jobs[i];
    REQUIRE(j.bindings.size() == 3);
    CHECK(j.bindings[0].first == "a");
    CHECK(j.bindings[1].first == "k");
    CHECK(j.bindings[2].first == "b");
    CHECK(j.bindings[0].second == Value::integer(expect[i].first));
    CHECK(j.bindings[1].second == Value::text("fixed"));
    CHECK(j.bindings[2].second == Value::text(expect[i].second));
  }
}

TEST_CASE("defaults-only and empty plans give one job") {
  const RunSpec d = make_run_spec(plan_of("parameter a integer default 1;\nparameter b float default 2.5;"), {});
  REQUIRE(d.jobs.size() == 1);
  CHECK(d.jobs[0].bindings.size() == 2);

  const RunSpec e = make_run_spec(Plan{}, {});
  REQUIRE(e.jobs.size() == 1);
  CHECK(e.jobs[0].bindings.empty());
  const auto text = lines_of(render_run_spec(e, RunSpecFormat::TextV1));
  CHECK(text == std::vector<std::string>{"runspec v1 seed=0", "job j1"});
}

TEST_CASE("make_run_step examples") {
  const Plan plan = plan_of(
      "parameter lig integer range from 1 to 3;\n"
      "parameter mode text select oneof \"fast\" slow default \"fast\";\n"
      "parameter t float range from 0 to 1 points 3;\n");
  const RunSpec rs = make_run_spec(plan, {});
  CHECK(make_run_step(plan.params[0], rs.axes[0]) == "values lig 1 2 3");
  CHECK(make_run_step(plan.params[1], rs.axes[1]) == "values mode \"fast\"");
  CHECK(make_run_step(plan.params[2], rs.axes[2]) == "values t 0 0.5 1");
}

TEST_CASE("rendered specs count lines and parse back") {
  const Plan plan = plan_of("parameter a text select anyof \"x y\" z;\n");
  const RunSpec rs = make_run_spec(plan, {});
  const auto text = lines_of(render_run_spec(rs, RunSpecFormat::TextV1));
  CHECK(text.size() == 4);
  CHECK(text[2] == "job j1 a=\"x y\"");
  CHECK(parse_run_spec(render_run_spec(rs, RunSpecFormat::TextV1), RunSpecFormat::TextV1,
                       axis_kinds(plan)) == rs);
  CHECK(parse_run_spec(render_run_spec(rs, RunSpecFormat::JsonV1), RunSpecFormat::JsonV1) == rs);
  CHECK_THROWS_AS(parse_run_spec("garbage", RunSpecFormat::TextV1), Error);
  CHECK_THROWS_AS(parse_run_spec("{\"version\":1}", RunSpecFormat::JsonV1), Error);
}

TEST_CASE("generated plans round-trip through both formats deterministically") {
  testing::Gen gen(99);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    Plan plan = gen.plan();
    if (!validate_plan(plan).empty()) continue;
    SweepSettings s;
    s.seed = static_cast<std::uint64_t>(gen.between(0, 1000000));
    std::uint64_t n = 0;
    try {
      n = count_jobs(plan, s);
    } catch (const Error&) {
      continue;
    }
    if (n > 5000) continue;
    const RunSpec rs = make_run_spec(plan, s);
    ++checked;
    CHECK(rs.jobs.size() == n);
    for (const RunSpecFormat f : {RunSpecFormat::TextV1, RunSpecFormat::JsonV1}) {
      const std::string out = render_run_spec(rs, f);
      CHECK(render_run_spec(make_run_spec(plan, s), f) == out);
      CHECK(parse_run_spec(out, f, axis_kinds(plan)) == rs);
    }
  }
  CHECK(checked > 100);
}
