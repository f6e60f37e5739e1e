#include "vpt/value.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "vpt/diagnostic.hpp"

namespace vpt {

Value Value::real(double v) {
  if (!std::isfinite(v)) throw Error(code::kOverflow, "non-finite real value");
  return Value(Storage(v));
}

double Value::as_number() const {
  if (kind() == ValueKind::Integer) return static_cast<double>(as_integer());
  return as_real();
}

const std::string& Value::as_string() const {
  if (const auto* t = std::get_if<TextValue>(&storage_)) return t->text;
  return std::get<FileValue>(storage_).path;
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Integer: return "integer";
    case ValueKind::Real: return "float";
    case ValueKind::Text: return "text";
    case ValueKind::File: return "file";
  }
  return "?";
}

bool parse_value_kind(std::string_view s, ValueKind& out) {
  for (ValueKind k : {ValueKind::Integer, ValueKind::Real, ValueKind::Text, ValueKind::File}) {
    if (to_string(k) == s) {
      out = k;
      return true;
    }
  }
  return false;
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

std::string quote_string(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string format_literal(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Integer: return std::to_string(v.as_integer());
    case ValueKind::Real: return format_real(v.as_real());
    case ValueKind::Text:
    case ValueKind::File: return quote_string(v.as_string());
  }
  return {};
}

std::string format_raw(const Value& v) {
  if (v.is_string()) return v.as_string();
  return format_literal(v);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  for (char c : s)
    if (!is_ident_char(c)) return false;
  return true;
}

}  // namespace vpt
