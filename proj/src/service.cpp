#include "vpt/service.hpp"

#include <charconv>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include <httplib.h>

#include "vpt/jobgen.hpp"
#include "vpt/param_model.hpp"
#include "vpt/parser.hpp"
#include "vpt/printer.hpp"

namespace vpt {

using nlohmann::json;

namespace {

// Run specs above this size are only available as a count.
constexpr std::uint64_t kMaxRenderedJobs = 1'000'000;

const char* const kIndexPage = R"(<!doctype html>
<html>
<head><meta charset="utf-8"><title>vpt editor</title>
<style>
body { font-family: sans-serif; display: grid; grid-template-columns: 1fr 1fr 1fr; gap: 1em; }
pre { background: #f4f4f4; padding: .5em; min-height: 10em; white-space: pre-wrap; }
</style>
</head>
<body>
<section><h2>Project</h2><pre id="project"></pre></section>
<section><h2>Input file</h2><pre id="file"></pre></section>
<section><h2>Plan <span id="jobs"></span></h2><pre id="plan"></pre></section>
<script>
let revision = -1;
async function refresh() {
  const p = await (await fetch('/api/project')).json();
  revision = p.revision;
  document.getElementById('project').textContent = JSON.stringify(p, null, 2);
  document.getElementById('plan').textContent = await (await fetch('/api/plan')).text();
  const c = await fetch('/api/runspec/count');
  document.getElementById('jobs').textContent = c.ok ? '(' + (await c.json()).jobs + ' jobs)' : '';
  if (p.files.length) {
    const f = await (await fetch('/api/files/' + p.files[0].id)).json();
    document.getElementById('file').textContent = f.content;
  }
}
async function poll() {
  for (;;) {
    try {
      const e = await (await fetch('/api/events?since=' + revision)).json();
      if (e.revision !== revision) await refresh();
    } catch (err) {
      await new Promise(r => setTimeout(r, 1000));
    }
  }
}
refresh().then(poll);
</script>
</body>
</html>
)";

json span_to_json(Span s) { return json{{"start", s.start}, {"end", s.end}}; }

json placeholders_to_json(const std::vector<Placeholder>& ps) {
  json out = json::array();
  for (const Placeholder& p : ps)
    out.push_back(json{{"name", p.name}, {"start", p.span.start}, {"end", p.span.end}});
  return out;
}

[[noreturn]] void bad_request(std::string message) {
  throw Error(code::kBadRequest, std::move(message));
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad_request(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad_request(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::size_t offset_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    bad_request(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

// One DSL literal from a JSON scalar.
std::string literal_text(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_real(v.get<double>());
  if (v.is_string()) return quote_string(v.get<std::string>());
  bad_request("domain values must be numbers or strings");
}

std::string literal_list(const json& v) {
  if (!v.is_array() || v.empty()) bad_request("expected a non-empty array of values");
  std::string out;
  for (const json& x : v) out += (out.empty() ? "" : " ") + literal_text(x);
  return out;
}

std::string domain_text(const json& d) {
  if (d.is_string()) return d.get<std::string>();
  const std::string kind = string_field(d, "kind");
  if (kind == "default") return "default " + literal_text(field(d, "value"));
  if (kind == "range" || kind == "random") {
    std::string s = kind + " from " + literal_text(field(d, "from")) + " to " + literal_text(field(d, "to"));
    if (kind == "range" && d.contains("step")) s += " step " + literal_text(d["step"]);
    if (d.contains("points")) s += " points " + literal_text(d["points"]);
    return s;
  }
  if (kind == "anyof" || kind == "select_anyof") {
    std::string s = "select anyof " + literal_list(field(d, "values"));
    if (d.contains("defaults") && !d["defaults"].empty()) s += " default " + literal_list(d["defaults"]);
    return s;
  }
  if (kind == "oneof" || kind == "select_oneof") {
    std::string s = "select oneof " + literal_list(field(d, "values"));
    if (d.contains("default") && !d["default"].is_null()) s += " default " + literal_text(d["default"]);
    return s;
  }
  if (kind == "compute") return "compute " + string_field(d, "expr");
  if (kind == "jitp") return "jitp " + quote_string(string_field(d, "raw"));
  bad_request("unknown domain kind '" + kind + "'");
}

// Parses a synthetic plan and surfaces its first error without a span (the
// span would point into text the client never saw).
Plan parse_snippet(const std::string& text) {
  ParseResult r = parse_plan(text);
  for (const Diagnostic& d : r.diagnostics)
    if (d.is_error()) throw Error(d.code, d.message);
  return std::move(*r.plan);
}

// A rejected import: the first error plus every diagnostic.
struct ImportFailure {
  Error error;
  json diagnostics;
};

int status_for(const Error& e) {
  if (e.code() == code::kNotFound) return 404;
  if (e.code() == code::kConflict) return 409;
  return 400;
}

}  // namespace

json diagnostic_to_json(const Diagnostic& d) {
  json j{{"severity", d.is_error() ? "error" : "warning"}, {"code", d.code}, {"message", d.message}};
  if (d.span.end > d.span.start) j["span"] = span_to_json(d.span);
  return j;
}

ParamDef param_from_json(const json& j) {
  const std::string name = string_field(j, "name");
  if (!is_identifier(name)) throw Error(code::kBadName, "'" + name + "' is not a valid parameter name");
  const std::string ptype = string_field(j, "ptype");
  ParamType t;
  if (!parse_param_type(ptype, t)) bad_request("unknown ptype '" + ptype + "'");
  std::string text = "parameter " + name;
  if (j.contains("label") && !j["label"].is_null()) text += " label " + quote_string(string_field(j, "label"));
  text += " " + std::string(to_string(t)) + " " + domain_text(field(j, "domain")) + ";";
  if (text.find_first_of("\r\n") != std::string::npos) bad_request("parameter text must be one line");
  Plan plan = parse_snippet(text);
  if (plan.params.size() != 1 || !plan.tasks.empty()) bad_request("domain must describe one parameter");
  return std::move(plan.params[0]);
}

TaskDef task_from_json(const json& j) {
  const std::string name = string_field(j, "name");
  if (!is_identifier(name)) throw Error(code::kBadName, "'" + name + "' is not a valid task name");
  const json& commands = field(j, "commands");
  if (!commands.is_array()) bad_request("field 'commands' must be an array");
  TaskDef task{name, {}};
  for (const json& c : commands) {
    if (c.is_string()) {
      const std::string line = c.get<std::string>();
      if (line.find_first_of("\r\n") != std::string::npos) bad_request("a command must be one line");
      Plan plan = parse_snippet("task " + name + "\n" + line + "\nendtask\n");
      if (plan.tasks.size() != 1 || plan.tasks[0].commands.size() != 1)
        bad_request("'" + line + "' is not a task command");
      task.commands.push_back(std::move(plan.tasks[0].commands[0]));
      continue;
    }
    const std::string kind = string_field(c, "kind");
    if (kind == "copy") {
      task.commands.push_back(CopyCommand{parse_location(string_field(c, "src")),
                                          parse_location(string_field(c, "dst"))});
    } else if (kind == "execute") {
      const bool on_node = c.contains("on_node") && c["on_node"].is_boolean() && c["on_node"].get<bool>();
      task.commands.push_back(ExecuteCommand{on_node, string_field(c, "command_line")});
    } else if (kind == "substitute") {
      task.commands.push_back(SubstituteCommand{string_field(c, "skeleton"), string_field(c, "output")});
    } else {
      bad_request("unknown command kind '" + kind + "'");
    }
  }
  return task;
}

struct EditorService::Impl {
  ServiceOptions opts;
  httplib::Server server;
  std::thread listener;
  int port = 0;

  mutable std::shared_mutex mu;  // guards project and revision
  Project project;
  std::uint64_t revision = 0;

  std::mutex events_mu;  // guards published and stopping
  std::condition_variable events_cv;
  std::uint64_t published = 0;
  bool stopping = false;

  Impl(Project p, ServiceOptions o) : opts(std::move(o)), project(std::move(p)) {
    // No SO_REUSEPORT: a second service on a taken port must fail to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    routes();
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void reply_error(httplib::Response& res, const Error& e) {
    reply(res, status_for(e), diagnostic_to_json(e.diagnostic()));
  }

  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) bad_request("request body must be a JSON object");
    return j;
  }

  // Runs `fn` against a copy of the project under the writer lock and
  // commits it only if `fn` returns normally.
  template <class Fn>
  void mutate(const httplib::Request& req, httplib::Response& res, Fn fn, bool bumps = true) {
    try {
      const json body = body_of(req);
      std::unique_lock lock(mu);
      if (body.contains("if_revision")) {
        const json& want = body["if_revision"];
        if (!want.is_number_integer() || want.get<std::int64_t>() < 0 ||
            want.get<std::uint64_t>() != revision)
          throw Error(code::kConflict, "revision is " + std::to_string(revision));
      }
      Project next = project;
      json out = fn(body, next);
      if (bumps) {
        project = std::move(next);
        ++revision;
        std::lock_guard events(events_mu);
        published = revision;
      }
      out["revision"] = revision;
      lock.unlock();
      if (bumps) events_cv.notify_all();
      reply(res, 200, out);
    } catch (const ImportFailure& f) {
      json body = diagnostic_to_json(f.error.diagnostic());
      body["diagnostics"] = f.diagnostics;
      reply(res, 400, body);
    } catch (const Error& e) {
      reply_error(res, e);
    }
  }

  template <class Fn>
  void read(httplib::Response& res, Fn fn) {
    try {
      std::shared_lock lock(mu);
      fn(project, revision);
    } catch (const Error& e) {
      reply_error(res, e);
    }
  }

  static SweepSettings settings_from(const httplib::Request& req) {
    SweepSettings s;
    if (req.has_param("seed")) {
      const std::string v = req.get_param_value("seed");
      std::uint64_t seed = 0;
      const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
      if (ec != std::errc() || end != v.data() + v.size()) bad_request("seed must be an unsigned integer");
      s.seed = seed;
    }
    return s;
  }

  static void require_valid(const Plan& plan) {
    for (const Diagnostic& d : validate_plan(plan))
      if (d.is_error()) throw Error(d);
  }

  void routes() {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kIndexPage, "text/html; charset=utf-8");
    });

    server.Get("/api/project", [this](const httplib::Request&, httplib::Response& res) {
      read(res, [&](const Project& p, std::uint64_t rev) {
        json files = json::array();
        for (const InputFile& f : p.files) files.push_back({{"id", f.id}, {"display_path", f.display_path}});
        json params = json::array();
        for (const ParamDef& d : p.plan.params) params.push_back(d.name);
        json diags = json::array();
        for (const Diagnostic& d : validate_plan(p.plan)) diags.push_back(diagnostic_to_json(d));
        for (const Diagnostic& d : project_diagnostics(p)) diags.push_back(diagnostic_to_json(d));
        reply(res, 200,
              json{{"name", p.name}, {"revision", rev}, {"files", files}, {"params", params},
                   {"suggested_param_name", suggest_param_name(p)}, {"diagnostics", diags}});
      });
    });

    server.Post("/api/files", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [](const json& body, Project& p) {
        auto [next, id] = add_input_file(p, string_field(body, "display_path"), string_field(body, "content"));
        p = std::move(next);
        return json{{"file_id", id}};
      });
    });

    server.Get(R"(/api/files/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      read(res, [&](const Project& p, std::uint64_t) {
        const InputFile* f = p.find_file(req.matches[1].str());
        if (!f) throw Error(code::kNotFound, "no file '" + req.matches[1].str() + "'");
        json out{{"id", f->id}, {"display_path", f->display_path}, {"content", f->content.content()}};
        try {
          out["placeholders"] = placeholders_to_json(f->content.placeholders());
        } catch (const Error& e) {
          out["placeholders"] = json::array();
          out["placeholder_error"] = diagnostic_to_json(e.diagnostic());
        }
        reply(res, 200, out);
      });
    });

    server.Post(R"(/api/files/([^/]+)/parameterize)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1].str();
      mutate(req, res, [&](const json& body, Project& p) {
        const Span span{offset_field(body, "start"), offset_field(body, "end")};
        json form = field(body, "param");
        if (form.is_object() && !form.contains("name")) form["name"] = suggest_param_name(p);
        ParameterizeFileResult r = parameterize_file(p, id, span, param_from_json(form));
        p = std::move(r.project);
        return json{{"replaced_text", r.replaced_text}, {"param", form["name"]}};
      });
    });

    server.Post("/api/plan/import", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [](const json& body, Project& p) {
        const std::string source = string_field(body, "source");
        ImportResult r = import_plan(p, source);
        json diags = json::array();
        for (const Diagnostic& d : r.diagnostics) diags.push_back(diagnostic_to_json(d));
        for (const Diagnostic& d : r.diagnostics)
          if (d.is_error()) throw ImportFailure{Error(d), diags};
        p = std::move(r.project);
        return json{{"diagnostics", diags}};
      });
    });

    server.Get("/api/plan", [this](const httplib::Request&, httplib::Response& res) {
      read(res, [&](const Project& p, std::uint64_t) {
        res.set_content(print_plan(p.plan), "text/plain; charset=utf-8");
      });
    });

    server.Get("/api/runspec", [this](const httplib::Request& req, httplib::Response& res) {
      read(res, [&](const Project& p, std::uint64_t) {
        const SweepSettings s = settings_from(req);
        const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
        if (format != "json" && format != "text") bad_request("format must be 'json' or 'text'");
        require_valid(p.plan);
        if (count_jobs(p.plan, s) > kMaxRenderedJobs)
          throw Error(code::kOverflow, "run spec too large to render; use /api/runspec/count");
        const RunSpec rs = make_run_spec(p.plan, s);
        if (format == "json")
          res.set_content(render_run_spec(rs, RunSpecFormat::JsonV1), "application/json");
        else
          res.set_content(render_run_spec(rs, RunSpecFormat::TextV1), "text/plain; charset=utf-8");
      });
    });

    server.Get("/api/runspec/count", [this](const httplib::Request& req, httplib::Response& res) {
      read(res, [&](const Project& p, std::uint64_t) {
        const SweepSettings s = settings_from(req);
        require_valid(p.plan);
        reply(res, 200, json{{"jobs", count_jobs(p.plan, s)}});
      });
    });

    server.Post("/api/tasks", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(req, res, [](const json& body, Project& p) {
        TaskDef t = task_from_json(body);
        const std::string name = t.name;
        p = add_task(p, std::move(t));
        return json{{"task", name}};
      });
    });

    server.Post("/api/project/save", [this](const httplib::Request& req, httplib::Response& res) {
      mutate(
          req, res,
          [this](const json&, Project& p) {
            if (opts.project_path.empty()) throw Error(code::kIo, "the service has no project file to save to");
            const std::filesystem::path tmp = opts.project_path.string() + ".tmp";
            {
              std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
              const std::string doc = save_project(p);
              if (!out || !out.write(doc.data(), static_cast<std::streamsize>(doc.size())))
                throw Error(code::kIo, "cannot write " + tmp.string());
            }
            std::error_code ec;
            std::filesystem::rename(tmp, opts.project_path, ec);
            if (ec) throw Error(code::kIo, "cannot replace " + opts.project_path.string() + ": " + ec.message());
            return json{{"path", opts.project_path.string()}};
          },
          false);
    });

    server.Get("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t since = 0;
      if (req.has_param("since")) {
        const std::string v = req.get_param_value("since");
        const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), since);
        if (ec != std::errc() || end != v.data() + v.size()) {
          reply_error(res, Error(code::kBadRequest, "since must be an unsigned integer"));
          return;
        }
      }
      std::unique_lock lock(events_mu);
      events_cv.wait_for(lock, opts.poll_timeout, [&] { return published > since || stopping; });
      reply(res, 200, json{{"revision", published}});
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        reply_error(res, e);
      } catch (const std::exception& e) {
        reply(res, 500, json{{"code", "E_INTERNAL"}, {"message", e.what()}});
      }
    });
  }

};

EditorService::EditorService(Project project, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(project), std::move(options))) {}

EditorService::~EditorService() { stop(); }

int EditorService::start() {
  Impl& s = *impl_;
  if (s.opts.port == 0) {
    s.port = s.server.bind_to_any_port(s.opts.host);
  } else {
    s.port = s.server.bind_to_port(s.opts.host, s.opts.port) ? s.opts.port : -1;
  }
  if (s.port <= 0)
    throw Error(code::kBind, "cannot listen on " + s.opts.host + ":" + std::to_string(s.opts.port));
  s.listener = std::thread([&s] { s.server.listen_after_bind(); });
  s.server.wait_until_ready();
  return s.port;
}

void EditorService::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

void EditorService::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.events_mu);
    s.stopping = true;
  }
  s.events_cv.notify_all();
  s.server.stop();
  if (s.listener.joinable()) s.listener.join();
}

int EditorService::port() const { return impl_->port; }

std::uint64_t EditorService::revision() const {
  std::shared_lock lock(impl_->mu);
  return impl_->revision;
}

Project EditorService::project() const {
  std::shared_lock lock(impl_->mu);
  return impl_->project;
}

}  // namespace vpt
