#include "vpt/executor.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

extern char** environ;

namespace vpt {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// Relative path that stays inside `base`, else E_PATH.
fs::path resolve_inside(const fs::path& base, const std::string& rel) {
  const fs::path p(rel);
  if (rel.empty() || p.is_absolute())
    throw Error(code::kPath, "path must be relative and non-empty: '" + rel + "'");
  const fs::path norm = p.lexically_normal();
  if (norm.empty() || *norm.begin() == ".." || norm == ".")
    throw Error(code::kPath, "path escapes its directory: '" + rel + "'");
  return base / norm;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(code::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size())))
    throw Error(code::kIo, "cannot write " + p.string());
}

class TaskRunner {
 public:
  explicit TaskRunner(const TaskContext& ctx) : ctx_(ctx) {}

  TaskResult run(const TaskDef& task) {
    TaskResult result;
    for (std::size_t i = 0; i < task.commands.size(); ++i) {
      try {
        std::visit([&](const auto& c) { exec(c); }, task.commands[i]);
      } catch (const Error& e) {
        result.ok = false;
        result.command_index = i;
        result.error_code = e.code();
        result.error = "command " + std::to_string(i) + ": " + e.diagnostic().message;
        result.exit_code = last_exit_;
        return result;
      }
    }
    result.exit_code = last_exit_;
    return result;
  }

 private:
  // Bare and `node:` paths: the job dir during `main`, else the node dir.
  const fs::path& base() const { return ctx_.job_dir.empty() ? ctx_.node_dir : ctx_.job_dir; }

  std::string expand(std::string_view text) const { return substitute(text, ctx_.bindings); }

  fs::path source_path(const Location& loc) const {
    const std::string rel = expand(loc.path);
    return resolve_inside(loc.scope == Scope::Root ? ctx_.root_dir : base(), rel);
  }

  void exec(const CopyCommand& c) {
    if (c.dst.scope == Scope::Root)
      throw Error(code::kPath, "the root directory is read-only");
    const fs::path src = source_path(c.src);
    const fs::path dst = resolve_inside(base(), expand(c.dst.path));
    std::error_code ec;
    if (!fs::exists(src, ec)) throw Error(code::kCopy, "copy source does not exist: " + src.string());
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path(), ec);
    fs::copy(src, dst, fs::copy_options::overwrite_existing | fs::copy_options::recursive, ec);
    if (ec) throw Error(code::kCopy, "copy " + src.string() + " -> " + dst.string() + ": " + ec.message());
  }

  void exec(const SubstituteCommand& c) {
    const Location skel = parse_location(c.skeleton);
    const Location out = parse_location(c.output);
    if (out.scope == Scope::Root) throw Error(code::kPath, "the root directory is read-only");
    const fs::path src = source_path(skel);
    const fs::path dst = resolve_inside(base(), expand(out.path));
    const std::string content = read_file(src);
    if (content.find('\0') != std::string::npos)
      throw Error(code::kBinary, "skeleton is binary: " + src.string());
    write_file(dst, substitute(content, ctx_.bindings));
  }

  void exec(const ExecuteCommand& c) {
    const std::string line = expand(c.command_line);
    const fs::path dir = c.on_node ? ctx_.node_dir : base();
    const fs::path out = ctx_.stdout_path.empty() ? dir / "stdout.txt" : ctx_.stdout_path;
    const fs::path err = ctx_.stderr_path.empty() ? dir / "stderr.txt" : ctx_.stderr_path;
    last_exit_ = spawn_and_wait(line, dir, out, err);
    if (last_exit_ != 0)
      throw Error(code::kExit, "'" + line + "' exited with status " + std::to_string(last_exit_));
  }

  int spawn_and_wait(const std::string& line, const fs::path& dir, const fs::path& out,
                     const fs::path& err) {
    // Everything the child touches is prepared before fork.
    std::vector<std::string> env_strings;
    for (char** e = environ; *e; ++e) {
      const std::string_view kv(*e);
      const std::string key(kv.substr(0, kv.find('=')));
      if (!ctx_.env.contains(key)) env_strings.emplace_back(kv);
    }
    for (const auto& [k, v] : ctx_.env) env_strings.push_back(k + "=" + v);
    std::vector<char*> envp;
    for (std::string& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);
    const std::string dir_s = dir.string(), out_s = out.string(), err_s = err.string();
    const char* argv[] = {"sh", "-c", line.c_str(), nullptr};

    const pid_t pid = fork();
    if (pid < 0) throw Error(code::kSpawn, "fork failed");
    if (pid == 0) {
      setpgid(0, 0);
      const int in_fd = open("/dev/null", O_RDONLY);
      const int out_fd = open(out_s.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
      const int err_fd = open(err_s.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
      if (in_fd < 0 || out_fd < 0 || err_fd < 0 || chdir(dir_s.c_str()) != 0) _exit(127);
      dup2(in_fd, 0);
      dup2(out_fd, 1);
      dup2(err_fd, 2);
      execve("/bin/sh", const_cast<char* const*>(argv), envp.data());
      _exit(127);
    }
    setpgid(pid, pid);

    const auto deadline = start_ + ctx_.timeout;
    auto nap = std::chrono::microseconds(200);
    int status = 0;
    while (true) {
      const pid_t r = waitpid(pid, &status, WNOHANG);
      if (r == pid) break;
      if (r < 0 && errno != EINTR) throw Error(code::kSpawn, "waitpid failed");
      if (Clock::now() >= deadline) {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
        waitpid(pid, &status, 0);
        last_exit_ = -1;
        throw Error(code::kTimeout, "'" + line + "' exceeded the time limit");
      }
      std::this_thread::sleep_for(nap);
      nap = std::min(nap * 2, std::chrono::microseconds(20000));
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return -1;
  }

  const TaskContext& ctx_;
  Clock::time_point start_ = Clock::now();
  int last_exit_ = 0;
};

// Writes the project's file snapshots under `root`.
void stage_files(const Project& project, const fs::path& root) {
  fs::create_directories(root);
  for (const InputFile& f : project.files) {
    const fs::path dst = resolve_inside(root, f.display_path);
    fs::create_directories(dst.parent_path());
    write_file(dst, f.content.content());
  }
}

std::map<std::string, std::string> job_env(const ExecOptions& opts, const JobSpec* job,
                                           const std::string& node) {
  std::map<std::string, std::string> env;
  env[opts.env_prefix + "NODENAME"] = node;
  if (!job) return env;
  env[opts.env_prefix + "JOBNAME"] = job->id;
  for (const auto& [name, value] : job->bindings) env[env_var_name(opts.env_prefix, name)] = format_raw(value);
  return env;
}

}  // namespace

std::string to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Succeeded: return "succeeded";
    case JobStatus::Failed: return "failed";
    case JobStatus::Skipped: return "skipped";
  }
  return "?";
}

bool SweepReport::ok() const {
  return failed == 0 && skipped == 0 &&
         std::all_of(phases.begin(), phases.end(), [](const PhaseRecord& p) { return p.ok; });
}

std::string report_to_json(const SweepReport& report) {
  nlohmann::ordered_json j;
  j["total"] = report.total;
  j["succeeded"] = report.succeeded;
  j["failed"] = report.failed;
  j["skipped"] = report.skipped;
  j["jobs"] = nlohmann::ordered_json::array();
  for (const JobRecord& r : report.jobs) {
    nlohmann::ordered_json o;
    o["id"] = r.id;
    o["node"] = r.node;
    o["status"] = to_string(r.status);
    o["exit_code"] = r.exit_code;
    o["duration_ms"] = r.duration_ms;
    o["sandbox"] = r.sandbox.string();
    o["stdout"] = r.stdout_path.string();
    o["stderr"] = r.stderr_path.string();
    if (!r.error_code.empty()) o["error"] = {{"code", r.error_code}, {"message", r.error}};
    j["jobs"].push_back(std::move(o));
  }
  j["phases"] = nlohmann::ordered_json::array();
  for (const PhaseRecord& p : report.phases) {
    nlohmann::ordered_json o;
    o["task"] = p.task;
    if (!p.node.empty()) o["node"] = p.node;
    o["ok"] = p.ok;
    if (!p.ok) o["error"] = {{"code", p.error_code}, {"message", p.error}};
    j["phases"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

TaskResult run_task(const TaskDef& task, const TaskContext& ctx) { return TaskRunner(ctx).run(task); }

std::string env_var_name(std::string_view prefix, std::string_view param) {
  std::string out(prefix);
  for (const char c : param)
    out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : '_';
  return out;
}

unsigned worker_for_job(std::uint64_t ordinal, unsigned workers) {
  return static_cast<unsigned>((ordinal - 1) % workers) + 1;
}

SweepReport run_sweep(const Project& project, const RunSpec& rs, const ExecOptions& opts) {
  const Plan& plan = project.plan;
  const TaskDef* main_task = plan.find_task("main");
  if (!main_task) throw Error(code::kNoMain, "the plan has no 'main' task");
  if (opts.workers < 1) throw Error(code::kWorkdir, "workers must be at least 1");
  std::error_code ec;
  if (!fs::is_directory(opts.workdir, ec))
    throw Error(code::kWorkdir, "work directory does not exist: " + opts.workdir.string());
  if (fs::exists(opts.workdir / "node1", ec))
    throw Error(code::kWorkdir, "work directory already holds a sweep: " + opts.workdir.string());

  fs::path root = opts.root_dir;
  if (root.empty()) {
    root = opts.workdir / "root";
    stage_files(project, root);
  }
  root = fs::absolute(root);
  const fs::path workdir = fs::absolute(opts.workdir);

  SweepReport report;
  report.total = rs.jobs.size();
  report.jobs.resize(rs.jobs.size());
  std::mutex mu;

  auto record_phase = [&](PhaseRecord p) {
    std::lock_guard lock(mu);
    report.phases.push_back(std::move(p));
  };
  auto finish_job = [&](std::size_t i, JobRecord r) {
    std::lock_guard lock(mu);
    switch (r.status) {
      case JobStatus::Succeeded: ++report.succeeded; break;
      case JobStatus::Failed: ++report.failed; break;
      case JobStatus::Skipped: ++report.skipped; break;
    }
    report.jobs[i] = std::move(r);
  };
  auto run_phase = [&](std::string_view name, const fs::path& dir, const std::string& node) {
    const TaskDef* t = plan.find_task(name);
    if (!t) return true;
    TaskContext ctx;
    ctx.root_dir = root;
    ctx.node_dir = dir;
    if (!node.empty()) ctx.bindings["nodename"] = Value::text(node);
    ctx.env = job_env(opts, nullptr, node);
    ctx.timeout = opts.timeout_per_job;
    ctx.stdout_path = dir / (std::string(name) + ".stdout.txt");
    ctx.stderr_path = dir / (std::string(name) + ".stderr.txt");
    const TaskResult r = run_task(*t, ctx);
    record_phase(PhaseRecord{std::string(name), node, r.ok, r.error_code, r.error});
    return r.ok;
  };
  auto skip_job = [&](std::size_t i, const std::string& node, std::string why) {
    JobRecord r;
    r.id = rs.jobs[i].id;
    r.node = node;
    r.status = JobStatus::Skipped;
    r.error = std::move(why);
    finish_job(i, std::move(r));
  };

  const bool root_ok = run_phase("rootstart", workdir, "");

  auto worker = [&](unsigned k) {
    const std::string node = "node" + std::to_string(k);
    const fs::path node_dir = workdir / node;
    fs::create_directories(node_dir);
    std::vector<std::size_t> mine;
    for (std::size_t i = 0; i < rs.jobs.size(); ++i)
      if (worker_for_job(i + 1, opts.workers) == k) mine.push_back(i);

    if (!root_ok) {
      for (std::size_t i : mine) skip_job(i, node, "rootstart failed");
      return;
    }
    if (!run_phase("nodestart", node_dir, node)) {
      for (std::size_t i : mine) skip_job(i, node, "nodestart failed");
      return;
    }
    for (std::size_t i : mine) {
      const JobSpec& job = rs.jobs[i];
      JobRecord r;
      r.id = job.id;
      r.node = node;
      r.sandbox = node_dir / job.id;
      r.stdout_path = r.sandbox / "stdout.txt";
      r.stderr_path = r.sandbox / "stderr.txt";
      const auto start = Clock::now();
      std::error_code mk;
      fs::create_directories(r.sandbox, mk);
      TaskContext ctx;
      ctx.root_dir = root;
      ctx.node_dir = node_dir;
      ctx.job_dir = r.sandbox;
      for (const auto& [name, value] : job.bindings) ctx.bindings[name] = value;
      ctx.bindings["jobname"] = Value::text(job.id);
      ctx.bindings["nodename"] = Value::text(node);
      ctx.env = job_env(opts, &job, node);
      ctx.timeout = opts.timeout_per_job;
      ctx.stdout_path = r.stdout_path;
      ctx.stderr_path = r.stderr_path;
      const TaskResult tr = mk ? TaskResult{false, 0, -1, std::string(code::kIo), "cannot create " + r.sandbox.string()}
                               : run_task(*main_task, ctx);
      r.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
      r.exit_code = tr.exit_code;
      r.status = tr.ok ? JobStatus::Succeeded : JobStatus::Failed;
      r.error_code = tr.error_code;
      r.error = tr.error;
      if (tr.ok && !opts.keep_sandboxes) fs::remove_all(r.sandbox, mk);
      finish_job(i, std::move(r));
    }
    run_phase("nodefinish", node_dir, node);
  };

  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k <= opts.workers; ++k) pool.emplace_back(worker, k);
  }
  if (root_ok) run_phase("rootfinish", workdir, "");
  return report;
}

}  // namespace vpt
