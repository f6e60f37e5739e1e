#include "vpt/diagnostic.hpp"

#include <algorithm>

namespace vpt {

Diagnostic make_error(std::string_view code, std::string message, Span span) {
  return Diagnostic{Severity::Error, std::string(code), std::move(message), span};
}

Diagnostic make_warning(std::string_view code, std::string message, Span span) {
  return Diagnostic{Severity::Warning, std::string(code), std::move(message), span};
}

bool has_errors(const Diagnostics& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.is_error(); });
}

Error::Error(Diagnostic diag)
    : std::runtime_error(diag.code + ": " + diag.message), diag_(std::move(diag)) {}

Error::Error(std::string_view code, std::string message, Span span)
    : Error(make_error(code, std::move(message), span)) {}

LineColumn line_column(std::string_view source, std::size_t offset) {
  offset = std::min(offset, source.size());
  LineColumn lc;
  for (std::size_t i = 0; i < offset; ++i) {
    if (source[i] == '\n') {
      ++lc.line;
      lc.column = 1;
    } else {
      ++lc.column;
    }
  }
  return lc;
}

std::string format_diagnostic(const Diagnostic& diag, std::string_view source,
                              std::string_view file_name) {
  const LineColumn lc = line_column(source, diag.span.start);
  std::string out;
  out += file_name;
  out += ':' + std::to_string(lc.line) + ':' + std::to_string(lc.column) + ": ";
  out += diag.is_error() ? "error" : "warning";
  out += '[' + diag.code + "]: " + diag.message;
  return out;
}

}  // namespace vpt
