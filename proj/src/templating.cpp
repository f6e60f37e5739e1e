#include "vpt/templating.hpp"

namespace vpt {
namespace {

enum class PieceKind { Placeholder, Escape, LiteralDollar };

struct Piece {
  PieceKind kind;
  Span span;
  std::string name;  // placeholders only
};

// Visits every `$`-introduced construct in order.
template <class Fn>
void scan_pieces(std::string_view s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t dollar = s.find('$', i);
    if (dollar == std::string_view::npos) return;
    i = dollar;
    const char next = i + 1 < s.size() ? s[i + 1] : '\0';
    if (next == '$') {
      fn(Piece{PieceKind::Escape, {i, i + 2}, {}});
      i += 2;
    } else if (next == '{') {
      const std::size_t eol = s.find('\n', i);
      const std::size_t close = s.find('}', i + 2);
      if (close == std::string_view::npos || (eol != std::string_view::npos && close > eol)) {
        const std::size_t end = eol == std::string_view::npos ? s.size() : eol;
        throw Error(code::kUnterminated, "'${' without closing '}'", {i, end});
      }
      std::string name(s.substr(i + 2, close - i - 2));
      if (!is_identifier(name))
        throw Error(code::kBadName, "'" + name + "' is not a valid placeholder name",
                    {i, close + 1});
      fn(Piece{PieceKind::Placeholder, {i, close + 1}, std::move(name)});
      i = close + 1;
    } else if (is_ident_start(next)) {
      std::size_t j = i + 1;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      fn(Piece{PieceKind::Placeholder, {i, j}, std::string(s.substr(i + 1, j - i - 1))});
      i = j;
    } else {
      fn(Piece{PieceKind::LiteralDollar, {i, i + 1}, {}});
      ++i;
    }
  }
}

}  // namespace

std::vector<Placeholder> scan_placeholders(std::string_view content) {
  std::vector<Placeholder> out;
  scan_pieces(content, [&](Piece p) {
    if (p.kind == PieceKind::Placeholder) out.push_back({std::move(p.name), p.span});
  });
  return out;
}

std::string substitute(std::string_view content, const Bindings& bindings) {
  std::string out;
  out.reserve(content.size());
  std::size_t copied = 0;
  scan_pieces(content, [&](const Piece& p) {
    if (p.kind == PieceKind::LiteralDollar) return;
    out.append(content.substr(copied, p.span.start - copied));
    copied = p.span.end;
    if (p.kind == PieceKind::Escape) {
      out += '$';
      return;
    }
    auto it = bindings.find(p.name);
    if (it == bindings.end())
      throw Error(code::kUnbound, "placeholder '" + p.name + "' has no binding", p.span);
    out += format_raw(it->second);
  });
  out.append(content.substr(copied));
  return out;
}

TemplateDoc::TemplateDoc(std::string content) : content_(std::move(content)) {
  if (content_.find('\0') != std::string::npos)
    throw Error(code::kBinary, "content contains a NUL byte (binary files are not supported)");
}

bool is_char_boundary(std::string_view content, std::size_t offset) {
  if (offset == 0 || offset == content.size()) return true;
  if (offset > content.size()) return false;
  return (static_cast<unsigned char>(content[offset]) & 0xC0) != 0x80;
}

ParameterizeResult parameterize_span(const TemplateDoc& doc, Span span, std::string_view name) {
  const std::string& text = doc.content();
  if (span.start >= span.end || span.end > text.size())
    throw Error(code::kSpan,
                "span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                    ") is empty or outside the " + std::to_string(text.size()) + "-byte content",
                span);
  if (!is_char_boundary(text, span.start) || !is_char_boundary(text, span.end))
    throw Error(code::kSpan, "span does not lie on UTF-8 character boundaries", span);
  if (!is_identifier(name))
    throw Error(code::kBadName, "'" + std::string(name) + "' is not a valid parameter name", span);

  scan_pieces(text, [&](const Piece& p) {
    if (p.kind == PieceKind::LiteralDollar) {
      if (p.span.end == span.start)
        throw Error(code::kOverlap, "selection directly follows a literal '$'", span);
      return;
    }
    if (p.span.intersects(span))
      throw Error(code::kOverlap,
                  p.kind == PieceKind::Escape
                      ? std::string("selection overlaps a '$$' escape")
                      : "selection overlaps placeholder '" + p.name + "'",
                  span);
  });

  ParameterizeResult result;
  result.replaced_text = text.substr(span.start, span.size());
  std::string content = text.substr(0, span.start);
  content += "${";
  content += name;
  content += '}';
  content += text.substr(span.end);
  result.doc = TemplateDoc(std::move(content));
  return result;
}

}  // namespace vpt
