#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vpt/diagnostic.hpp"
#include "vpt/value.hpp"

namespace vpt {

/// Placeholder grammar shared by input files, task command lines and the
/// editor:  `${name}` (canonical), `$name` (longest identifier), `$$` (a
/// literal dollar). Any other `$` is literal text.

struct Placeholder {
  std::string name;
  Span span;
  friend bool operator==(const Placeholder&, const Placeholder&) = default;
};

using Bindings = std::map<std::string, Value, std::less<>>;

/// Occurrences ordered by start offset. Throws Error(E_UNTERMINATED) for a
/// `${` without `}` on the same line and Error(E_BAD_NAME) for `${...}`
/// whose body is not an identifier.
std::vector<Placeholder> scan_placeholders(std::string_view content);

/// Replaces every placeholder with format_raw(value) and `$$` with `$`.
/// Throws Error(E_UNBOUND) naming the first unbound placeholder.
std::string substitute(std::string_view content, const Bindings& bindings);

/// An input file's text. Placeholders are derived on demand.
class TemplateDoc {
 public:
  TemplateDoc() = default;
  /// Throws Error(E_BINARY) if `content` contains a NUL byte.
  explicit TemplateDoc(std::string content);

  const std::string& content() const { return content_; }
  std::vector<Placeholder> placeholders() const { return scan_placeholders(content_); }

  friend bool operator==(const TemplateDoc&, const TemplateDoc&) = default;

 private:
  std::string content_;
};

struct ParameterizeResult {
  TemplateDoc doc;
  std::string replaced_text;
};

/// Replaces the selected bytes with `${name}`. Throws Error(E_SPAN) for an
/// empty, out-of-bounds or non-UTF-8-boundary span, Error(E_OVERLAP) when the
/// span touches an existing placeholder or `$$` (or directly follows a literal
/// `$`), Error(E_BAD_NAME) for a non-identifier name.
ParameterizeResult parameterize_span(const TemplateDoc& doc, Span span, std::string_view name);

/// True when `offset` is 0, the content size, or the first byte of a UTF-8
/// sequence.
bool is_char_boundary(std::string_view content, std::size_t offset);

}  // namespace vpt
