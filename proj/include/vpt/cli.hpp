#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vpt {

/// Process exit statuses of the `vpt` command.
enum ExitStatus : int {
  kExitOk = 0,
  kExitDiagnostics = 1,  // validation or diagnostic failure
  kExitUsage = 2,
  kExitRuntime = 3,  // sweep or runtime failure
};

/// Runs one `vpt` invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::istream& in);

}  // namespace vpt
