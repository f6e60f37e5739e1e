#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "support/tempdir.hpp"
#include "vpt/cli.hpp"
#include "vpt/project.hpp"
#include "vpt/service.hpp"

using namespace vpt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  const int code = run_cli(args, out, err, in);
  return {code, out.str(), err.str()};
}

const fs::path kFixtures = VPT_FIXTURE_DIR;
const std::string kDocking = (kFixtures / "docking/docking.vpt").string();

}  // namespace

TEST_CASE("jobs --count on the docking plan") {
  const Outcome o = cli({"jobs", kDocking, "--count"});
  CHECK(o.code == 0);
  CHECK(o.out == "2000\n");
  CHECK(o.err.empty());
}

TEST_CASE("validate reports parse errors with positions on stderr only") {
  testing::TempDir dir;
  testing::spit(dir / "bad.vpt", "parameter a integer default 1;\nparameter b integer default 2\n");
  const Outcome bad = cli({"validate", (dir / "bad.vpt").string()});
  CHECK(bad.code == 1);
  CHECK(bad.out.empty());
  CHECK(bad.err.find(":2:30: error[E_PARSE]") != std::string::npos);

  const Outcome good = cli({"validate", kDocking});
  CHECK(good.code == 0);
  CHECK(good.out.empty());
  CHECK(good.err.empty());
}

TEST_CASE("canon is idempotent through stdin") {
  const Outcome first = cli({"canon", kDocking});
  REQUIRE(first.code == 0);
  const Outcome second = cli({"canon", "-"}, first.out);
  CHECK(second.code == 0);
  CHECK(second.out == first.out);
  CHECK(first.out.starts_with("parameter lig label \"ligand\" integer range from 1 to 2000 step 1;\n\ntask nodestart\n"));
}

TEST_CASE("jobs output formats, overrides and seeds") {
  const std::string plan =
      "parameter m text select oneof fast slow;\n"
      "parameter r float random from 0 to 1 points 2;\n";
  const Outcome json_out = cli({"jobs", "-", "--set", "m=slow", "--format", "json", "--seed", "9"}, plan);
  REQUIRE(json_out.code == 0);
  const auto doc = nlohmann::json::parse(json_out.out);
  CHECK(doc["seed"] == 9);
  CHECK(doc["jobs"].size() == 2);
  CHECK(doc["jobs"][0]["bindings"]["m"] == "slow");

  const Outcome text = cli({"jobs", "-", "--set", "m=slow", "--seed", "9"}, plan);
  CHECK(text.out.starts_with("runspec v1 seed=9\n"));
  CHECK(cli({"jobs", "-", "--set", "m=slow", "--seed", "9"}, plan).out == text.out);

  CHECK(cli({"jobs", "-"}, plan).code == 1);
  CHECK(cli({"jobs", "-", "--set", "m=nope"}, plan).err.find("E_OVERRIDE") != std::string::npos);
  CHECK(cli({"jobs", "-", "--set", "zz=1"}, plan).code == 1);
  CHECK(cli({"jobs", "-", "--set", "novalue"}, plan).code == 2);
  CHECK(cli({"jobs", "-", "--format", "xml"}, plan).code == 2);

  const Outcome any = cli({"jobs", "-", "--set", "a=3,1", "--count"}, "parameter a integer select anyof 1 2 3;\n");
  CHECK(any.code == 0);
  CHECK(any.out == "2\n");
}

TEST_CASE("VPT_SEED supplies the default seed") {
  const std::string plan = "parameter r integer random from 1 to 6 points 5;\n";
  setenv("VPT_SEED", "42", 1);
  const Outcome from_env = cli({"jobs", "-", "--format", "json"}, plan);
  unsetenv("VPT_SEED");
  REQUIRE(from_env.code == 0);
  const auto doc = nlohmann::json::parse(from_env.out);
  CHECK(doc["seed"] == 42);
  CHECK(doc["axes"][0]["values"] == nlohmann::json::array({1, 1, 1, 6, 5}));
  CHECK(cli({"jobs", "-", "--format", "json", "--seed", "42"}, plan).out == from_env.out);
}

TEST_CASE("expand substitutes bindings") {
  const Outcome o = cli({"expand", (kFixtures / "docking/dock.in").string(), "--bind", "lig=5"});
  CHECK(o.code == 0);
  CHECK(o.out.starts_with("ligand_atom_file S_5.mol2\n"));
  CHECK(cli({"expand", "-", "--bind", "a=1", "b=x y"}, "$a ${b} $$").out == "1 x y $");
  const Outcome unbound = cli({"expand", "-"}, "${who}");
  CHECK(unbound.code == 1);
  CHECK(unbound.err.find("E_UNBOUND") != std::string::npos);
  CHECK(cli({"expand", "-", "--bind", "=1"}, "").code == 2);
}

TEST_CASE("usage errors exit with 2 and print usage") {
  const Outcome none = cli({});
  CHECK(none.code == 2);
  CHECK(none.err.find("Usage:") != std::string::npos);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({"jobs", kDocking, "--nope"}).code == 2);
  CHECK(cli({"run", kDocking, "--workers", "0"}).code == 2);
  CHECK(cli({"canon", "/nonexistent/plan.vpt"}).code == 2);
  const Outcome help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("jobs") != std::string::npos);
}

TEST_CASE("run executes a plan sweep and writes a report") {
  testing::TempDir dir;
  testing::spit(dir / "in/plan.vpt",
                "parameter i integer range from 1 to 3;\n\n"
                "task main\n  substitute root:tpl.txt out.txt\n  execute cat out.txt\nendtask\n");
  testing::spit(dir / "in/tpl.txt", "i=${i}\n");
  const fs::path work = dir / "work";
  const Outcome o = cli({"run", (dir / "in/plan.vpt").string(), "--workers", "2", "--workdir", work.string()});
  CHECK(o.code == 0);
  CHECK(o.out.starts_with("jobs: total=3 succeeded=3 failed=0 skipped=0\n"));
  CHECK(testing::slurp(work / "node2/j2/stdout.txt") == "i=2\n");
  const auto report = nlohmann::json::parse(testing::slurp(work / "report.json"));
  CHECK(report["succeeded"] == 3);

  // The same work directory cannot be reused.
  CHECK(cli({"run", (dir / "in/plan.vpt").string(), "--workdir", work.string()}).code == 3);
}

TEST_CASE("run exit codes: failing sweeps, missing main, bad plans") {
  testing::TempDir dir;
  const Outcome failing = cli({"run", "-", "--workdir", (dir / "a").string()},
                              "parameter i integer range from 1 to 2;\ntask main\n  execute exit 4\nendtask\n");
  CHECK(failing.code == 3);
  CHECK(failing.err.find("j1 failed: [E_EXIT]") != std::string::npos);
  CHECK(cli({"run", "-", "--workdir", (dir / "b").string()}, "parameter i integer default 1;\n").code == 1);
  CHECK(cli({"run", "-", "--workdir", (dir / "c").string()}, "parameter i;\n").code == 1);
}

TEST_CASE("run accepts saved projects") {
  testing::TempDir dir;
  Project p = add_input_file(new_project("demo"), "data.txt", "v=${v}\n").first;
  p = import_plan(p, "parameter v text select anyof a b;\n"
                     "task main\n  substitute root:data.txt data.txt\n  execute cat data.txt\nendtask\n").project;
  testing::spit(dir / "demo.vptproj", save_project(p));
  const Outcome o = cli({"run", (dir / "demo.vptproj").string(), "--workdir", (dir / "w").string()});
  CHECK(o.code == 0);
  CHECK(testing::slurp(dir / "w/node1/j2/stdout.txt") == "v=b\n");
  CHECK(testing::slurp(dir / "w/root/data.txt") == "v=${v}\n");

  testing::spit(dir / "broken.vptproj", "{\"version\": 7}");
  const Outcome broken = cli({"run", (dir / "broken.vptproj").string(), "--workdir", (dir / "x").string()});
  CHECK(broken.code == 1);
  CHECK(broken.err.find("E_VERSION") != std::string::npos);
}

TEST_CASE("serve fails with status 3 when the port is taken") {
  EditorService other(new_project("other"), {});
  const int port = other.start();
  const Outcome o = cli({"serve", "--port", std::to_string(port)});
  CHECK(o.code == 3);
  CHECK(o.err.find("E_BIND") != std::string::npos);
  CHECK(cli({"serve", "--port", "0"}).code == 2);
}
