#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vpt/jobgen.hpp"
#include "vpt/plan.hpp"
#include "vpt/project.hpp"
#include "vpt/templating.hpp"

namespace vpt {

struct ExecOptions {
  unsigned workers = 1;
  std::filesystem::path workdir;
  std::chrono::milliseconds timeout_per_job = std::chrono::seconds(300);
  bool keep_sandboxes = true;
  std::string env_prefix = "VPT_";
  // Read-only input directory for `root:` paths. Empty: the project's files
  // are staged into workdir/root.
  std::filesystem::path root_dir;
};

enum class JobStatus { Succeeded, Failed, Skipped };
std::string to_string(JobStatus s);

struct JobRecord {
  std::string id;
  std::string node;
  JobStatus status = JobStatus::Skipped;
  int exit_code = 0;  // -1 when the job never exited on its own
  std::int64_t duration_ms = 0;
  std::filesystem::path sandbox;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
  std::string error_code;
  std::string error;
};

/// Outcome of a node or root phase task.
struct PhaseRecord {
  std::string task;
  std::string node;  // empty for root phases
  bool ok = true;
  std::string error_code;
  std::string error;
};

struct SweepReport {
  std::uint64_t total = 0;
  std::uint64_t succeeded = 0;
  std::uint64_t failed = 0;
  std::uint64_t skipped = 0;
  std::vector<JobRecord> jobs;  // run spec order
  std::vector<PhaseRecord> phases;

  bool ok() const;
};

std::string report_to_json(const SweepReport& report);

struct TaskContext {
  Bindings bindings;  // job bindings plus builtins
  std::filesystem::path root_dir;
  std::filesystem::path node_dir;
  std::filesystem::path job_dir;  // empty outside `main`
  std::map<std::string, std::string> env;
  std::chrono::milliseconds timeout = std::chrono::seconds(300);
  // Output capture; defaults to stdout.txt/stderr.txt in the working dir.
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
};

struct TaskResult {
  bool ok = true;
  std::size_t command_index = 0;  // failing command
  int exit_code = 0;
  std::string error_code;
  std::string error;
};

/// Runs the commands in order, stopping at the first failure.
TaskResult run_task(const TaskDef& task, const TaskContext& ctx);

/// `<prefix><NAME>`: upper-cased, non-alphanumerics mapped to `_`.
std::string env_var_name(std::string_view prefix, std::string_view param);

/// 1-based worker index that runs the job with 1-based `ordinal`.
unsigned worker_for_job(std::uint64_t ordinal, unsigned workers);

/// Executes every job of `rs` with the project's tasks. Throws
/// Error(E_NO_MAIN, E_WORKDIR, E_PATH); job failures land in the report.
SweepReport run_sweep(const Project& project, const RunSpec& rs, const ExecOptions& opts);

}  // namespace vpt
