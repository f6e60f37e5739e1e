#include <doctest.h>

#include <algorithm>
#include <set>

#include "support/tempdir.hpp"
#include "vpt/executor.hpp"
#include "vpt/parser.hpp"

using namespace vpt;
namespace fs = std::filesystem;
using testing::slurp;
using testing::spit;
using testing::TempDir;

namespace {

Project project_of(std::string_view plan_text) {
  const ImportResult r = import_plan(new_project("x"), plan_text);
  REQUIRE_MESSAGE(r.diagnostics.empty(), plan_text);
  return r.project;
}

ExecOptions options(const TempDir& dir, unsigned workers = 1) {
  ExecOptions o;
  o.workers = workers;
  o.workdir = dir / "run";
  o.root_dir = dir / "root";
  fs::create_directories(o.workdir);
  fs::create_directories(o.root_dir);
  return o;
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

TEST_CASE("round-robin sweep with substituted command lines") {
  TempDir dir;
  const Project p = project_of(
      "parameter i integer range from 1 to 3 step 1;\n"
      "task main\n  execute echo ${i}\nendtask\n");
  const ExecOptions o = options(dir, 2);
  const SweepReport r = run_sweep(p, make_run_spec(p.plan, {}), o);
  CHECK(r.total == 3);
  CHECK(r.succeeded == 3);
  CHECK(r.ok());
  CHECK(fs::is_directory(o.workdir / "node1" / "j1"));
  CHECK(fs::is_directory(o.workdir / "node2" / "j2"));
  CHECK(fs::is_directory(o.workdir / "node1" / "j3"));
  CHECK(slurp(o.workdir / "node2" / "j2" / "stdout.txt") == "2\n");
  CHECK(r.jobs[1].node == "node2");
  CHECK(r.jobs[1].stdout_path == o.workdir / "node2" / "j2" / "stdout.txt");
}

TEST_CASE("empty main succeeds with an empty sandbox") {
  TempDir dir;
  const Project p = project_of("task main\nendtask\n");
  const ExecOptions o = options(dir);
  const SweepReport r = run_sweep(p, make_run_spec(p.plan, {}), o);
  CHECK(r.total == 1);
  CHECK(r.succeeded == 1);
  CHECK(fs::is_empty(o.workdir / "node1" / "j1"));
}

TEST_CASE("failing jobs do not stop the sweep") {
  TempDir dir;
  const Project p = project_of(
      "parameter i integer range from 1 to 3;\n"
      "task main\n  execute false-command-that-exits-1 || exit 1\nendtask\n");
  const SweepReport r = run_sweep(p, make_run_spec(p.plan, {}), options(dir, 2));
  CHECK(r.failed == 3);
  CHECK(r.succeeded == 0);
  for (const JobRecord& j : r.jobs) {
    CHECK(j.status == JobStatus::Failed);
    CHECK(j.exit_code == 1);
    CHECK(j.error_code == "E_EXIT");
  }
  CHECK_FALSE(r.ok());
}

TEST_CASE("run_task stages, instantiates and runs") {
  TempDir dir;
  spit(dir / "root/config.in", "ligand_atom_file S_${lig}.mol2\n");
  fs::create_directories(dir / "node1");
  const TaskDef t{"nodestart",
                  {CopyCommand{{Scope::Root, "config.in"}, {Scope::Node, "config.in"}},
                   SubstituteCommand{"config.in", "config.run"},
                   ExecuteCommand{true, "cat config.run"}}};
  TaskContext ctx;
  ctx.root_dir = dir / "root";
  ctx.node_dir = dir / "node1";
  ctx.bindings["lig"] = Value::integer(1);
  const TaskResult r = run_task(t, ctx);
  CHECK(r.ok);
  CHECK(slurp(dir / "node1/config.run") == "ligand_atom_file S_1.mol2\n");
  CHECK(slurp(dir / "node1/stdout.txt") == "ligand_atom_file S_1.mol2\n");

  CHECK(run_task(TaskDef{"empty", {}}, ctx).ok);

  const TaskResult missing = run_task(
      TaskDef{"t", {CopyCommand{{Scope::Root, "nope"}, {Scope::Node, "x"}}}}, ctx);
  CHECK_FALSE(missing.ok);
  CHECK(missing.command_index == 0);
  CHECK(missing.error_code == "E_COPY");
}

TEST_CASE("the root directory is read-only and paths stay in their sandbox") {
  TempDir dir;
  spit(dir / "root/a", "a");
  fs::create_directories(dir / "node1");
  TaskContext ctx;
  ctx.root_dir = dir / "root";
  ctx.node_dir = dir / "node1";
  auto fails_with = [&](TaskCommand c) { return run_task(TaskDef{"t", {std::move(c)}}, ctx).error_code; };
  CHECK(fails_with(CopyCommand{{Scope::Root, "a"}, {Scope::Root, "b"}}) == "E_PATH");
  CHECK(fails_with(SubstituteCommand{"root:a", "root:b"}) == "E_PATH");
  CHECK(fails_with(CopyCommand{{Scope::Root, "a"}, {Scope::Node, "../escaped"}}) == "E_PATH");
  CHECK(fails_with(CopyCommand{{Scope::Root, "../../etc/passwd"}, {Scope::Node, "x"}}) == "E_PATH");
  CHECK(fails_with(CopyCommand{{Scope::Root, "/etc/passwd"}, {Scope::Node, "x"}}) == "E_PATH");
  CHECK(fails_with(ExecuteCommand{true, "echo ${nope}"}) == "E_UNBOUND");
  CHECK_FALSE(fs::exists(dir / "root/b"));
  CHECK_FALSE(fs::exists(dir / "escaped"));
}

TEST_CASE("bindings reach child processes as environment variables") {
  CHECK(env_var_name("VPT_", "lig") == "VPT_LIG");
  CHECK(env_var_name("VPT_", "my-param2") == "VPT_MY_PARAM2");
  TempDir dir;
  const Project p = project_of(
      "parameter my_param text default \"hello world\";\n"
      "task main\n  execute printenv VPT_MY_PARAM VPT_JOBNAME VPT_NODENAME\nendtask\n");
  const ExecOptions o = options(dir);
  const SweepReport r = run_sweep(p, make_run_spec(p.plan, {}), o);
  REQUIRE(r.ok());
  CHECK(slurp(o.workdir / "node1/j1/stdout.txt") == "hello world\nj1\nnode1\n");
}

TEST_CASE("builtins name the job and node") {
  TempDir dir;
  const Project p = project_of(
      "parameter i integer range from 1 to 2;\n"
      "task main\n  execute echo ${jobname} ${nodename} > ${jobname}.txt\nendtask\n");
  const ExecOptions o = options(dir, 2);
  REQUIRE(run_sweep(p, make_run_spec(p.plan, {}), o).ok());
  CHECK(slurp(o.workdir / "node2/j2/j2.txt") == "j2 node2\n");
}

TEST_CASE("timeouts kill the job and keep the counts balanced") {
  TempDir dir;
  const Project p = project_of(
      "parameter i integer range from 1 to 2;\n"
      "task main\n  execute sleep 10\nendtask\n");
  ExecOptions o = options(dir, 2);
  o.timeout_per_job = std::chrono::milliseconds(200);
  const auto start = std::chrono::steady_clock::now();
  const SweepReport r = run_sweep(p, make_run_spec(p.plan, {}), o);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
  CHECK(r.failed == 2);
  CHECK(r.succeeded + r.failed + r.skipped == r.total);
  CHECK(r.jobs[0].error_code == "E_TIMEOUT");
  CHECK(r.jobs[0].exit_code == -1);
}

TEST_CASE("node phases run once per node and a failed nodestart skips its jobs") {
  TempDir dir;
  const Project ok = project_of(
      "parameter i integer range from 1 to 4;\n"
      "task nodestart\n  execute echo start ${nodename}\nendtask\n"
      "task main\n  node:execute echo ${i} >> seen.txt\nendtask\n"
      "task nodefinish\n  execute echo finish\nendtask\n");
  const ExecOptions o = options(dir, 2);
  const SweepReport r = run_sweep(ok, make_run_spec(ok.plan, {}), o);
  CHECK(r.ok());
  CHECK(slurp(o.workdir / "node1/nodestart.stdout.txt") == "start node1\n");
  CHECK(slurp(o.workdir / "node1/seen.txt") == "1\n3\n");
  CHECK(slurp(o.workdir / "node2/seen.txt") == "2\n4\n");
  CHECK(slurp(o.workdir / "node2/nodefinish.stdout.txt") == "finish\n");
  CHECK(r.phases.size() == 4);

  TempDir dir2;
  const Project bad = project_of(
      "parameter i integer range from 1 to 3;\n"
      "task nodestart\n  execute exit 3\nendtask\n"
      "task main\n  execute true\nendtask\n");
  const SweepReport s = run_sweep(bad, make_run_spec(bad.plan, {}), options(dir2, 1));
  CHECK(s.skipped == 3);
  CHECK(s.succeeded + s.failed + s.skipped == s.total);

  TempDir dir3;
  const Project root_bad = project_of(
      "parameter i integer range from 1 to 3;\n"
      "task rootstart\n  execute exit 1\nendtask\n"
      "task main\n  execute true\nendtask\n");
  CHECK(run_sweep(root_bad, make_run_spec(root_bad.plan, {}), options(dir3, 2)).skipped == 3);
}

TEST_CASE("sweep preconditions") {
  TempDir dir;
  const Project no_main = project_of("parameter i integer default 1;\n");
  CHECK(error_code([&] { run_sweep(no_main, make_run_spec(no_main.plan, {}), options(dir)); }) ==
        "E_NO_MAIN");
  const Project p = project_of("task main\nendtask\n");
  ExecOptions o = options(dir);
  o.workdir = dir / "missing";
  CHECK(error_code([&] { run_sweep(p, make_run_spec(p.plan, {}), o); }) == "E_WORKDIR");
  o = options(dir);
  run_sweep(p, make_run_spec(p.plan, {}), o);
  CHECK(error_code([&] { run_sweep(p, make_run_spec(p.plan, {}), o); }) == "E_WORKDIR");
}

TEST_CASE("project files are staged as the root and sandboxes can be dropped") {
  TempDir dir;
  Project p = add_input_file(new_project("s"), "in/cfg.txt", "v=${i}\n").first;
  p = import_plan(p, "parameter i integer range from 1 to 3;\n"
                     "task main\n  substitute root:in/cfg.txt cfg.txt\n  execute cat cfg.txt\n"
                     "  execute test ${i} -ne 2\nendtask\n").project;
  ExecOptions o;
  o.workdir = dir.path();
  o.keep_sandboxes = false;
  const SweepReport r = run_sweep(p, make_run_spec(p.plan, {}), o);
  CHECK(r.succeeded == 2);
  CHECK(r.failed == 1);
  CHECK(slurp(dir / "root/in/cfg.txt") == "v=${i}\n");
  CHECK_FALSE(fs::exists(dir / "node1/j1"));
  CHECK(slurp(dir / "node1/j2/stdout.txt") == "v=2\n");
  CHECK(report_to_json(r).find("\"failed\": 1") != std::string::npos);
}

TEST_CASE("job placement is a pure function of ordinal and worker count") {
  CHECK(worker_for_job(1, 4) == 1);
  CHECK(worker_for_job(4, 4) == 4);
  CHECK(worker_for_job(5, 4) == 1);
  CHECK(worker_for_job(7, 1) == 1);
}

TEST_CASE("docking desk sweep is independent of the worker count") {
  const fs::path fixtures = VPT_FIXTURE_DIR;
  std::vector<std::multiset<std::string>> outputs;
  for (const unsigned workers : {1u, 4u}) {
    TempDir dir;
    Project p = add_input_file(new_project("dock"), "dock.in", slurp(fixtures / "docking/dock.in")).first;
    p = add_input_file(p, "dock.sh", slurp(fixtures / "docking/dock.sh")).first;
    p = import_plan(p, slurp(fixtures / "docking/docking.vpt")).project;
    SweepSettings s;
    Plan small = p.plan;
    std::get<RangeDomain>(small.params[0].domain).to = Value::integer(20);
    ExecOptions o;
    o.workdir = dir.path();
    o.workers = workers;
    const SweepReport r = run_sweep(p, make_run_spec(small, s), o);
    CHECK(r.succeeded == 20);
    std::multiset<std::string> out;
    for (const JobRecord& j : r.jobs) {
      std::string text = slurp(j.stdout_path);
      // The node line differs by design; the instantiated input must not.
      out.insert(text.substr(text.find(" lig=")));
    }
    CHECK(out.count(" lig=7\nligand_atom_file S_7.mol2\nreceptor_site_file rec.sph\n"
                    "score_grid_prefix grid\nvdw_definition_file vdw.defn\nflex_definition_file flex.defn\n") == 1);
    outputs.push_back(std::move(out));
  }
  CHECK(outputs[0] == outputs[1]);
}
