#include "vpt/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "vpt/executor.hpp"
#include "vpt/jobgen.hpp"
#include "vpt/parser.hpp"
#include "vpt/printer.hpp"
#include "vpt/project.hpp"
#include "vpt/service.hpp"
#include "vpt/templating.hpp"

namespace vpt {

namespace fs = std::filesystem;

namespace {

// Fails an invocation with a given exit status.
struct Exit {
  int status;
};

struct Input {
  std::string name;  // for diagnostics
  std::string text;
  fs::path dir;  // directory relative paths resolve against
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err, std::istream& in) : out_(out), err_(err), in_(in) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Parameter sweep plans: validate, expand and run.", "vpt"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string file;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    std::vector<std::string> binds;
    std::string format = "text";
    bool count = false;
    unsigned workers = 1;
    std::string workdir;
    int port = 8080;
    std::string project_file;

    auto* validate = app.add_subcommand("validate", "Check a plan; diagnostics go to stderr");
    validate->add_option("plan", file, "Plan file, or - for stdin")->required();

    auto* canon = app.add_subcommand("canon", "Print a plan in canonical form");
    canon->add_option("plan", file, "Plan file, or - for stdin")->required();

    auto* jobs = app.add_subcommand("jobs", "Expand a plan into its run specification");
    jobs->add_option("plan", file, "Plan file, or - for stdin")->required();
    jobs->add_option("--seed", seed, "Seed for random domains")->envname("VPT_SEED");
    jobs->add_option("--set", sets, "Selection override name=v[,v...]")->allow_extra_args(false);
    jobs->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    jobs->add_flag("--count", count, "Print only the number of jobs");

    auto* expand = app.add_subcommand("expand", "Substitute placeholders in a template file");
    expand->add_option("template", file, "Template file, or - for stdin")->required();
    expand->add_option("--bind", binds, "Binding name=value");

    auto* run = app.add_subcommand("run", "Run a sweep locally");
    run->add_option("input", file, "Project (.vptproj) or plan file, or - for stdin")->required();
    run->add_option("--workers", workers, "Number of simulated nodes")->check(CLI::PositiveNumber);
    run->add_option("--workdir", workdir, "Directory for node and job sandboxes");
    run->add_option("--seed", seed, "Seed for random domains")->envname("VPT_SEED");

    auto* serve = app.add_subcommand("serve", "Start the editor service");
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
    serve->add_option("--project", project_file, "Project file to load and save");

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        app.exit(e, out_, err_);
        return kExitOk;
      }
      err_ << "vpt: " << e.what() << "\n\n" << app.help();
      return kExitUsage;
    }

    try {
      if (validate->parsed()) return do_validate(read_input(file));
      if (canon->parsed()) return do_canon(read_input(file));
      if (jobs->parsed()) return do_jobs(read_input(file), seed.value_or(0), sets, format, count);
      if (expand->parsed()) return do_expand(read_input(file), binds);
      if (run->parsed()) return do_run(read_input(file), seed.value_or(0), workers, workdir);
      if (serve->parsed()) return do_serve(port, project_file);
    } catch (const Exit& e) {
      return e.status;
    }
    return kExitUsage;
  }

 private:
  Input read_input(const std::string& path) {
    if (path == "-") {
      std::ostringstream ss;
      ss << in_.rdbuf();
      return {"<stdin>", ss.str(), fs::current_path()};
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) {
      err_ << "vpt: cannot read '" << path << "'\n";
      throw Exit{kExitUsage};
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return {path, ss.str(), fs::absolute(fs::path(path)).parent_path()};
  }

  void report(const Diagnostic& d, const Input& input) {
    err_ << format_diagnostic(d, input.text, input.name) << "\n";
  }

  [[noreturn]] void fail(const Error& e, const Input& input, int status) {
    report(e.diagnostic(), input);
    throw Exit{status};
  }

  Plan parse_or_exit(const Input& input) {
    ParseResult r = parse_plan(input.text);
    for (const Diagnostic& d : r.diagnostics) report(d, input);
    if (!r.ok()) throw Exit{kExitDiagnostics};
    return std::move(*r.plan);
  }

  int do_validate(const Input& input) {
    parse_or_exit(input);
    return kExitOk;
  }

  int do_canon(const Input& input) {
    out_ << print_plan(parse_or_exit(input));
    return kExitOk;
  }

  static Value override_value(const ParamDef& p, const std::string& v) {
    auto bad = [&](const char* what) -> Value {
      throw Error(code::kOverride, "'" + v + "' is not " + what + " for '" + p.name + "'");
    };
    switch (p.ptype) {
      case ParamType::Integer: {
        std::int64_t n = 0;
        const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        return ec == std::errc() && end == v.data() + v.size() ? Value::integer(n) : bad("an integer");
      }
      case ParamType::Float: {
        double x = 0;
        const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        return ec == std::errc() && end == v.data() + v.size() ? Value::real(x) : bad("a number");
      }
      case ParamType::Text: return Value::text(v);
      case ParamType::File: return Value::file(v);
    }
    return bad("a value");
  }

  SweepSettings settings_for(const Plan& plan, std::uint64_t seed, const std::vector<std::string>& sets,
                             const Input& input) {
    SweepSettings s;
    s.seed = seed;
    try {
      for (const std::string& item : sets) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
          err_ << "vpt: --set expects name=v[,v...], got '" << item << "'\n";
          throw Exit{kExitUsage};
        }
        const std::string name = item.substr(0, eq);
        const ParamDef* p = plan.find_param(name);
        if (!p) throw Error(code::kOverride, "no parameter named '" + name + "'");
        std::vector<Value>& values = s.overrides[name];
        std::stringstream rest(item.substr(eq + 1));
        for (std::string v; std::getline(rest, v, ',');) values.push_back(override_value(*p, v));
      }
      check_overrides(plan, s);
    } catch (const Error& e) {
      fail(e, input, kExitDiagnostics);
    }
    return s;
  }

  int do_jobs(const Input& input, std::uint64_t seed, const std::vector<std::string>& sets,
              const std::string& format, bool count) {
    const Plan plan = parse_or_exit(input);
    const SweepSettings s = settings_for(plan, seed, sets, input);
    try {
      if (count) {
        out_ << count_jobs(plan, s) << "\n";
        return kExitOk;
      }
      const RunSpec rs = make_run_spec(plan, s);
      out_ << render_run_spec(rs, format == "json" ? RunSpecFormat::JsonV1 : RunSpecFormat::TextV1);
    } catch (const Error& e) {
      fail(e, input, kExitDiagnostics);
    }
    return kExitOk;
  }

  int do_expand(const Input& input, const std::vector<std::string>& binds) {
    Bindings b;
    for (const std::string& item : binds) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || !is_identifier(item.substr(0, eq))) {
        err_ << "vpt: --bind expects name=value, got '" << item << "'\n";
        return kExitUsage;
      }
      b[item.substr(0, eq)] = Value::text(item.substr(eq + 1));
    }
    try {
      if (input.text.find('\0') != std::string::npos)
        throw Error(code::kBinary, "template contains a NUL byte");
      out_ << substitute(input.text, b);
    } catch (const Error& e) {
      fail(e, input, kExitDiagnostics);
    }
    return kExitOk;
  }

  static fs::path fresh_workdir() {
    for (int n = 1;; ++n) {
      fs::path p = fs::current_path() / ("vpt-run-" + std::to_string(n));
      if (!fs::exists(p)) return p;
    }
  }

  int do_run(const Input& input, std::uint64_t seed, unsigned workers, const std::string& workdir) {
    Project project;
    ExecOptions opts;
    const auto first = input.text.find_first_not_of(" \t\r\n");
    const bool is_project =
        input.name.ends_with(".vptproj") || (first != std::string::npos && input.text[first] == '{');
    if (is_project) {
      try {
        project = load_project(input.text);
      } catch (const Error& e) {
        fail(e, input, kExitDiagnostics);
      }
    } else {
      project = new_project(fs::path(input.name).stem().string());
      project.plan = parse_or_exit(input);
      opts.root_dir = input.dir;
    }
    for (const Diagnostic& d : validate_plan(project.plan)) report(d, input);
    if (has_errors(validate_plan(project.plan))) return kExitDiagnostics;

    SweepSettings s;
    s.seed = seed;
    RunSpec rs;
    try {
      rs = make_run_spec(project.plan, s);
    } catch (const Error& e) {
      fail(e, input, kExitDiagnostics);
    }

    opts.workers = workers;
    opts.workdir = workdir.empty() ? fresh_workdir() : fs::path(workdir);
    std::error_code ec;
    fs::create_directories(opts.workdir, ec);
    SweepReport report;
    try {
      report = run_sweep(project, rs, opts);
    } catch (const Error& e) {
      err_ << "vpt: error[" << e.code() << "]: " << e.diagnostic().message << "\n";
      return e.code() == code::kNoMain ? kExitDiagnostics : kExitRuntime;
    }

    const fs::path report_path = opts.workdir / "report.json";
    std::ofstream(report_path, std::ios::binary) << report_to_json(report);
    out_ << "jobs: total=" << report.total << " succeeded=" << report.succeeded
         << " failed=" << report.failed << " skipped=" << report.skipped << "\n";
    out_ << "workdir: " << opts.workdir.string() << "\n";
    out_ << "report: " << report_path.string() << "\n";
    for (const JobRecord& j : report.jobs)
      if (j.status != JobStatus::Succeeded)
        err_ << j.id << " " << to_string(j.status) << ": " << (j.error_code.empty() ? "" : "[" + j.error_code + "] ")
             << j.error << "\n";
    for (const PhaseRecord& p : report.phases)
      if (!p.ok) err_ << p.task << (p.node.empty() ? "" : " on " + p.node) << " failed: [" << p.error_code << "] " << p.error << "\n";
    return report.ok() ? kExitOk : kExitRuntime;
  }

  int do_serve(int port, const std::string& project_file) {
    Project project = new_project("untitled");
    ServiceOptions opts;
    opts.port = port;
    if (!project_file.empty()) {
      opts.project_path = project_file;
      if (fs::exists(project_file)) {
        const Input input = read_input(project_file);
        try {
          project = load_project(input.text);
        } catch (const Error& e) {
          fail(e, input, kExitDiagnostics);
        }
      } else {
        project = new_project(fs::path(project_file).stem().string());
      }
    }
    EditorService service(std::move(project), opts);
    try {
      service.start();
    } catch (const Error& e) {
      err_ << "vpt: error[" << e.code() << "]: " << e.diagnostic().message << "\n";
      return kExitRuntime;
    }
    out_ << "serving on http://" << opts.host << ":" << service.port() << "/" << std::endl;
    service.wait();
    return kExitOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  std::istream& in_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
  return Cli(out, err, in).run(args);
}

}  // namespace vpt
