#include "vpt/project.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "vpt/param_model.hpp"
#include "vpt/parser.hpp"
#include "vpt/printer.hpp"

namespace vpt {
namespace {

using ordered_json = nlohmann::ordered_json;

void throw_first_error(const Diagnostics& diags) {
  for (const Diagnostic& d : diags)
    if (d.is_error()) throw Error(d);
}

std::string next_file_id(const Project& project) {
  std::uint64_t highest = 0;
  for (const InputFile& f : project.files) {
    if (f.id.size() > 1 && f.id[0] == 'f' &&
        std::all_of(f.id.begin() + 1, f.id.end(), [](char c) { return c >= '0' && c <= '9'; }))
      highest = std::max<std::uint64_t>(highest, std::stoull(f.id.substr(1)));
  }
  return "f" + std::to_string(highest + 1);
}

[[noreturn]] void corrupt(const std::string& path, const std::string& what) {
  throw Error(code::kCorrupt, path + ": " + what);
}

const ordered_json& field(const ordered_json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) corrupt(path + "." + key, "missing");
  return obj[key];
}

std::string string_field(const ordered_json& obj, const char* key, const std::string& path) {
  const ordered_json& v = field(obj, key, path);
  if (!v.is_string()) corrupt(path + "." + key, "expected string");
  return v.get<std::string>();
}

}  // namespace

const InputFile* Project::find_file(std::string_view id) const {
  auto it = std::find_if(files.begin(), files.end(), [&](const InputFile& f) { return f.id == id; });
  return it == files.end() ? nullptr : &*it;
}

Project new_project(std::string name) {
  Project p;
  p.name = std::move(name);
  return p;
}

std::pair<Project, std::string> add_input_file(const Project& project, std::string display_path,
                                               std::string content) {
  Project next = project;
  std::string id = next_file_id(project);
  next.files.push_back({id, std::move(display_path), TemplateDoc(std::move(content))});
  return {std::move(next), std::move(id)};
}

Project define_parameter(const Project& project, ParamDef param) {
  if (project.plan.find_param(param.name))
    throw Error(code::kDupParam, "duplicate parameter '" + param.name + "'");
  throw_first_error(validate_param(param));
  Project next = project;
  if (param.origin != ParamOrigin::FileDependent) param.origin = ParamOrigin::FileIndependent;
  next.plan.params.push_back(std::move(param));
  ++next.next_param_ordinal;
  return next;
}

ParameterizeFileResult parameterize_file(const Project& project, std::string_view file_id,
                                         Span span, ParamDef param) {
  const InputFile* file = project.find_file(file_id);
  if (!file) throw Error(code::kNotFound, "no input file '" + std::string(file_id) + "'");
  ParameterizeResult edit = parameterize_span(file->content, span, param.name);
  param.origin = ParamOrigin::FileDependent;
  Project next = define_parameter(project, std::move(param));
  for (InputFile& f : next.files)
    if (f.id == file_id) f.content = std::move(edit.doc);
  return {std::move(next), std::move(edit.replaced_text)};
}

ImportResult import_plan(const Project& project, std::string_view source) {
  ParseResult parsed = parse_plan(source);
  if (!parsed.ok()) return {project, std::move(parsed.diagnostics)};

  Diagnostics diags;
  for (std::size_t i = 0; i < parsed.plan->params.size(); ++i) {
    const std::string& name = parsed.plan->params[i].name;
    if (project.plan.find_param(name))
      diags.push_back(make_error(code::kDupParam,
                                 "parameter '" + name + "' already exists in the project",
                                 parsed.param_spans[i]));
  }
  for (std::size_t i = 0; i < parsed.plan->tasks.size(); ++i) {
    const std::string& name = parsed.plan->tasks[i].name;
    if (project.plan.find_task(name))
      diags.push_back(make_error(code::kDupTask, "task '" + name + "' already exists in the project",
                                 parsed.task_spans[i]));
  }
  if (has_errors(diags)) return {project, std::move(diags)};

  Project next = project;
  for (ParamDef& p : parsed.plan->params) {
    p.origin = ParamOrigin::Imported;
    next.plan.params.push_back(std::move(p));
  }
  for (TaskDef& t : parsed.plan->tasks) next.plan.tasks.push_back(std::move(t));
  return {std::move(next), std::move(parsed.diagnostics)};
}

Project add_task(const Project& project, TaskDef task) {
  if (project.plan.find_task(task.name))
    throw Error(code::kDupTask, "duplicate task '" + task.name + "'");
  throw_first_error(validate_task(task));
  Project next = project;
  next.plan.tasks.push_back(std::move(task));
  return next;
}

Diagnostics project_diagnostics(const Project& project) {
  Diagnostics diags = validate_plan(project.plan);
  for (const InputFile& f : project.files) {
    std::vector<Placeholder> found;
    try {
      found = f.content.placeholders();
    } catch (const Error& e) {
      Diagnostic d = e.diagnostic();
      d.severity = Severity::Warning;
      d.message = f.id + ": " + d.message;
      diags.push_back(std::move(d));
      continue;
    }
    std::set<std::string> reported;
    for (const Placeholder& ph : found) {
      if (project.plan.find_param(ph.name) || ph.name == "jobname" || ph.name == "nodename")
        continue;
      if (reported.insert(ph.name).second)
        diags.push_back(make_warning(code::kUnusedPlaceholder,
                                     f.id + ": placeholder '" + ph.name +
                                         "' has no matching parameter",
                                     ph.span));
    }
  }
  return diags;
}

std::string suggest_param_name(const Project& project) {
  for (std::uint64_t n = project.next_param_ordinal;; ++n) {
    std::string name = "p" + std::to_string(n);
    if (!project.plan.find_param(name)) return name;
  }
}

std::string save_project(const Project& project) {
  ordered_json doc;
  doc["version"] = project.version;
  doc["name"] = project.name;
  doc["next_param_ordinal"] = project.next_param_ordinal;
  doc["files"] = ordered_json::array();
  for (const InputFile& f : project.files)
    doc["files"].push_back(
        {{"id", f.id}, {"display_path", f.display_path}, {"content", f.content.content()}});
  ordered_json origins = ordered_json::object();
  for (const ParamDef& p : project.plan.params) origins[p.name] = std::string(to_string(p.origin));
  doc["plan"] = {{"source", print_plan(project.plan)}, {"origins", std::move(origins)}};
  return doc.dump(2) + "\n";
}

Project load_project(std::string_view document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    corrupt("$", std::string("invalid JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) corrupt("$", "expected object");
  const ordered_json& version = field(doc, "version", "$");
  if (!version.is_number_integer()) corrupt("$.version", "expected integer");
  if (version.get<std::int64_t>() != Project::kFormatVersion)
    throw Error(code::kVersion, "unsupported project version " + version.dump() +
                                    " (expected " + std::to_string(Project::kFormatVersion) + ")");

  Project p;
  p.name = string_field(doc, "name", "$");
  if (doc.contains("next_param_ordinal")) {
    if (!doc["next_param_ordinal"].is_number_unsigned())
      corrupt("$.next_param_ordinal", "expected unsigned integer");
    p.next_param_ordinal = doc["next_param_ordinal"].get<std::uint64_t>();
  }

  const ordered_json& files = field(doc, "files", "$");
  if (!files.is_array()) corrupt("$.files", "expected array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string path = "$.files[" + std::to_string(i) + "]";
    if (!files[i].is_object()) corrupt(path, "expected object");
    InputFile f;
    f.id = string_field(files[i], "id", path);
    if (f.id.empty()) corrupt(path + ".id", "empty id");
    if (!ids.insert(f.id).second) corrupt(path + ".id", "duplicate id '" + f.id + "'");
    f.display_path = string_field(files[i], "display_path", path);
    try {
      f.content = TemplateDoc(string_field(files[i], "content", path));
    } catch (const Error& e) {
      corrupt(path + ".content", e.diagnostic().message);
    }
    p.files.push_back(std::move(f));
  }

  const ordered_json& plan = field(doc, "plan", "$");
  if (!plan.is_object()) corrupt("$.plan", "expected object");
  const std::string source = string_field(plan, "source", "$.plan");
  ParseResult parsed = parse_plan(source);
  if (!parsed.ok()) {
    const Diagnostic& d = parsed.diagnostics.front();
    const LineColumn lc = line_column(source, d.span.start);
    corrupt("$.plan.source", std::to_string(lc.line) + ":" + std::to_string(lc.column) + ": " +
                                 d.code + " " + d.message);
  }
  p.plan = std::move(*parsed.plan);
  if (plan.contains("origins")) {
    const ordered_json& origins = plan["origins"];
    if (!origins.is_object()) corrupt("$.plan.origins", "expected object");
    for (const auto& [name, value] : origins.items()) {
      const std::string path = "$.plan.origins." + name;
      auto it = std::find_if(p.plan.params.begin(), p.plan.params.end(),
                             [&](const ParamDef& d) { return d.name == name; });
      if (it == p.plan.params.end()) corrupt(path, "no such parameter");
      if (!value.is_string() || !parse_param_origin(value.get<std::string>(), it->origin))
        corrupt(path, "expected file_dependent, file_independent or imported");
    }
  }
  return p;
}

}  // namespace vpt
