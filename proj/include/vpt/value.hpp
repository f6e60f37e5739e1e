#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace vpt {

struct TextValue {
  std::string text;
  friend bool operator==(const TextValue&, const TextValue&) = default;
};

struct FileValue {
  std::string path;
  friend bool operator==(const FileValue&, const FileValue&) = default;
};

enum class ValueKind { Integer, Real, Text, File };

/// A literal bound to a parameter. Real values are always finite.
class Value {
 public:
  using Storage = std::variant<std::int64_t, double, TextValue, FileValue>;

  Value() : storage_(std::int64_t{0}) {}
  static Value integer(std::int64_t v) { return Value(Storage(v)); }
  static Value real(double v);  // throws Error(E_OVERFLOW) when non-finite
  static Value text(std::string v) { return Value(Storage(TextValue{std::move(v)})); }
  static Value file(std::string v) { return Value(Storage(FileValue{std::move(v)})); }

  ValueKind kind() const { return static_cast<ValueKind>(storage_.index()); }
  bool is_numeric() const { return kind() == ValueKind::Integer || kind() == ValueKind::Real; }
  bool is_string() const { return !is_numeric(); }

  std::int64_t as_integer() const { return std::get<std::int64_t>(storage_); }
  double as_real() const { return std::get<double>(storage_); }
  /// Numeric view of an Integer or Real value.
  double as_number() const;
  /// Text of a Text or File value.
  const std::string& as_string() const;

  const Storage& storage() const { return storage_; }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  explicit Value(Storage s) : storage_(std::move(s)) {}
  Storage storage_;
};

std::string_view to_string(ValueKind kind);
/// Inverse of to_string; returns false for unknown spellings.
bool parse_value_kind(std::string_view s, ValueKind& out);

/// Shortest decimal spelling that reads back to the same double.
std::string format_real(double v);

/// `"..."` with `\\`, `\"`, `\n`, `\r`, `\t` escaped.
std::string quote_string(std::string_view s);

/// Canonical plan-language spelling: numerals bare, text/file quoted.
std::string format_literal(const Value& v);

/// Spelling used when a value is spliced into a file or command line.
std::string format_raw(const Value& v);

/// `[A-Za-z_][A-Za-z0-9_]*`
bool is_identifier(std::string_view s);
inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

}  // namespace vpt
