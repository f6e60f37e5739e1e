#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "vpt/project.hpp"

namespace vpt {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  // Target of POST /api/project/save; empty disables saving.
  std::filesystem::path project_path;
  std::chrono::milliseconds poll_timeout = std::chrono::seconds(25);
};

/// The editor's HTTP+JSON API over one in-memory project. Mutations are
/// serialized and each successful one bumps the revision by one.
class EditorService {
 public:
  EditorService(Project project, ServiceOptions options);
  ~EditorService();
  EditorService(const EditorService&) = delete;
  EditorService& operator=(const EditorService&) = delete;

  /// Binds and starts serving in the background; returns the bound port.
  /// Throws Error(E_BIND).
  int start();
  /// Blocks until stop() is called.
  void wait();
  void stop();

  int port() const;
  std::uint64_t revision() const;
  Project project() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Builds a ParamDef from the editor's JSON form:
/// {name, label?, ptype, domain} where domain is either DSL text such as
/// "range from 1 to 2000 step 1" or an object {"kind": ..., ...}.
/// Throws Error with the parser's code.
ParamDef param_from_json(const nlohmann::json& j);

/// TaskDef from {name, commands}; commands are task body lines
/// ("execute echo ${x}") or objects {"kind": "copy"|"execute"|"substitute", ...}.
TaskDef task_from_json(const nlohmann::json& j);

nlohmann::json diagnostic_to_json(const Diagnostic& d);

}  // namespace vpt
