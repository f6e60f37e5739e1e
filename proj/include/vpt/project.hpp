#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpt/diagnostic.hpp"
#include "vpt/plan.hpp"
#include "vpt/templating.hpp"

namespace vpt {

struct InputFile {
  std::string id;
  std::string display_path;
  TemplateDoc content;
  friend bool operator==(const InputFile&, const InputFile&) = default;
};

/// Everything that describes one parameter-sweep project. Values are
/// immutable in practice: every operation below returns a new Project.
struct Project {
  static constexpr int kFormatVersion = 1;

  std::string name;
  int version = kFormatVersion;
  std::vector<InputFile> files;
  Plan plan;
  std::uint64_t next_param_ordinal = 1;

  const InputFile* find_file(std::string_view id) const;
  friend bool operator==(const Project&, const Project&) = default;
};

Project new_project(std::string name);

/// Appends a snapshot of `content` with a fresh id `f<n>`.
/// Throws Error(E_BINARY).
std::pair<Project, std::string> add_input_file(const Project& project, std::string display_path,
                                               std::string content);

/// File-independent parameterization. Throws Error(E_DUP_PARAM, E_TYPE, ...)
/// with the first validation finding.
Project define_parameter(const Project& project, ParamDef param);

struct ParameterizeFileResult {
  Project project;
  std::string replaced_text;
};

/// File-dependent parameterization: replaces `span` in the file with
/// `${param.name}` and defines the parameter, both or neither.
ParameterizeFileResult parameterize_file(const Project& project, std::string_view file_id,
                                         Span span, ParamDef param);

struct ImportResult {
  Project project;
  Diagnostics diagnostics;
};

/// Parses plan text and appends its parameters and tasks. On any error the
/// returned project equals the input.
ImportResult import_plan(const Project& project, std::string_view source);

/// Throws Error(E_DUP_TASK, E_TASK, E_BAD_NAME).
Project add_task(const Project& project, TaskDef task);

/// Warnings for file placeholders that no parameter defines.
Diagnostics project_diagnostics(const Project& project);

/// `p<n>` for the smallest n >= next_param_ordinal not already taken.
std::string suggest_param_name(const Project& project);

/// Versioned JSON document.
std::string save_project(const Project& project);

/// Throws Error(E_VERSION) for a version other than 1 and Error(E_CORRUPT)
/// naming the offending field path otherwise.
Project load_project(std::string_view document);

}  // namespace vpt
