#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vpt {

/// Half-open byte range [start, end) into some source text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool intersects(const Span& other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class Severity { Error, Warning };

// Stable diagnostic codes. They appear in CLI output and HTTP bodies, so
// never rename one.
namespace code {
inline constexpr std::string_view kParse = "E_PARSE";
inline constexpr std::string_view kLex = "E_LEX";
inline constexpr std::string_view kDupParam = "E_DUP_PARAM";
inline constexpr std::string_view kDupTask = "E_DUP_TASK";
inline constexpr std::string_view kType = "E_TYPE";
inline constexpr std::string_view kEmptyRange = "E_EMPTY_RANGE";
inline constexpr std::string_view kBadStep = "E_BAD_STEP";
inline constexpr std::string_view kBadPoints = "E_BAD_POINTS";
inline constexpr std::string_view kBadDefault = "E_BAD_DEFAULT";
inline constexpr std::string_view kOverflow = "E_OVERFLOW";
inline constexpr std::string_view kNoSelection = "E_NO_SELECTION";
inline constexpr std::string_view kOverride = "E_OVERRIDE";
inline constexpr std::string_view kSpan = "E_SPAN";
inline constexpr std::string_view kOverlap = "E_OVERLAP";
inline constexpr std::string_view kBadName = "E_BAD_NAME";
inline constexpr std::string_view kUnterminated = "E_UNTERMINATED";
inline constexpr std::string_view kUnbound = "E_UNBOUND";
inline constexpr std::string_view kBinary = "E_BINARY";
inline constexpr std::string_view kTask = "E_TASK";
inline constexpr std::string_view kVersion = "E_VERSION";
inline constexpr std::string_view kCorrupt = "E_CORRUPT";
inline constexpr std::string_view kNoMain = "E_NO_MAIN";
inline constexpr std::string_view kWorkdir = "E_WORKDIR";
inline constexpr std::string_view kPath = "E_PATH";
inline constexpr std::string_view kCopy = "E_COPY";
inline constexpr std::string_view kExit = "E_EXIT";
inline constexpr std::string_view kTimeout = "E_TIMEOUT";
inline constexpr std::string_view kSpawn = "E_SPAWN";
inline constexpr std::string_view kIo = "E_IO";
inline constexpr std::string_view kNotFound = "E_NOT_FOUND";
inline constexpr std::string_view kBind = "E_BIND";
inline constexpr std::string_view kConflict = "E_CONFLICT";
inline constexpr std::string_view kBadRequest = "E_BAD_REQUEST";
inline constexpr std::string_view kUsage = "E_USAGE";
inline constexpr std::string_view kUnusedPlaceholder = "W_UNUSED_PLACEHOLDER";
}  // namespace code

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  Span span;

  bool is_error() const { return severity == Severity::Error; }
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

Diagnostic make_error(std::string_view code, std::string message, Span span = {});
Diagnostic make_warning(std::string_view code, std::string message, Span span = {});

bool has_errors(const Diagnostics& diags);

/// Raised by engine operations whose contract is "value or error". Carries
/// the diagnostic so callers (CLI, HTTP) can surface the stable code.
class Error : public std::runtime_error {
 public:
  explicit Error(Diagnostic diag);
  Error(std::string_view code, std::string message, Span span = {});

  const Diagnostic& diagnostic() const noexcept { return diag_; }
  const std::string& code() const noexcept { return diag_.code; }

 private:
  Diagnostic diag_;
};

struct LineColumn {
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based, in bytes
};

LineColumn line_column(std::string_view source, std::size_t offset);

/// `file:line:col: error[E_PARSE]: message`
std::string format_diagnostic(const Diagnostic& diag, std::string_view source,
                              std::string_view file_name);

}  // namespace vpt
