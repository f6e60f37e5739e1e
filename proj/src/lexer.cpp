#include "vpt/lexer.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "vpt/value.hpp"

namespace vpt {
namespace {

constexpr std::array<std::pair<std::string_view, TokenKind>, 20> kKeywords{{
    {"parameter", TokenKind::Parameter}, {"label", TokenKind::Label},
    {"integer", TokenKind::Integer},     {"float", TokenKind::Float},
    {"text", TokenKind::Text},           {"file", TokenKind::File},
    {"default", TokenKind::Default},     {"range", TokenKind::Range},
    {"from", TokenKind::From},           {"to", TokenKind::To},
    {"step", TokenKind::Step},           {"points", TokenKind::Points},
    {"select", TokenKind::Select},       {"anyof", TokenKind::AnyOf},
    {"oneof", TokenKind::OneOf},         {"random", TokenKind::Random},
    {"compute", TokenKind::Compute},     {"jitp", TokenKind::Jitp},
    {"task", TokenKind::Task},           {"endtask", TokenKind::EndTask},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; };
           return lower(x) == lower(y);
         });
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\v' || c == '\f'; }

// Byte length of the UTF-8 sequence introduced by `lead`, 1 for stray bytes.
std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xF0 && lead <= 0xF4) return 4;
  if (lead >= 0xE0) return lead <= 0xEF ? 3 : 1;
  if (lead >= 0xC2 && lead <= 0xDF) return 2;
  return 1;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexResult run() {
    while (pos_ < src_.size()) {
      if (mode_ == Mode::TaskBody)
        lex_task_line();
      else
        lex_plan_token();
    }
    push(TokenKind::Eof, pos_, pos_);
    return std::move(out_);
  }

 private:
  enum class Mode { Plan, TaskBody };

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  bool at_end() const { return pos_ >= src_.size(); }
  bool at_newline() const {
    return peek() == '\n' || (peek() == '\r' && peek(1) == '\n');
  }

  Token& push(TokenKind kind, std::size_t start, std::size_t end, std::string text = {}) {
    Token t;
    t.kind = kind;
    t.span = {start, end};
    t.lexeme = std::string(src_.substr(start, end - start));
    t.text = std::move(text);
    out_.tokens.push_back(std::move(t));
    if (kind != TokenKind::Whitespace && kind != TokenKind::Comment &&
        kind != TokenKind::Newline && kind != TokenKind::Eof) {
      line_has_significant_ = true;
    }
    return out_.tokens.back();
  }

  void error(std::string message, std::size_t start, std::size_t end) {
    out_.diagnostics.push_back(make_error(code::kLex, std::move(message), {start, end}));
  }

  void lex_newline() {
    const std::size_t start = pos_;
    pos_ += peek() == '\r' ? 2 : 1;
    push(TokenKind::Newline, start, pos_);
    line_has_significant_ = false;
    if (task_header_pending_) {
      task_header_pending_ = false;
      mode_ = Mode::TaskBody;
    }
  }

  void lex_whitespace() {
    const std::size_t start = pos_;
    while (!at_end() && (is_blank(peek()) || (peek() == '\r' && peek(1) != '\n'))) ++pos_;
    push(TokenKind::Whitespace, start, pos_);
  }

  void lex_comment() {
    const std::size_t start = pos_;
    while (!at_end() && !at_newline()) ++pos_;
    push(TokenKind::Comment, start, pos_);
  }

  void lex_illegal() {
    const std::size_t start = pos_;
    std::size_t len = utf8_length(static_cast<unsigned char>(peek()));
    len = std::min(len, src_.size() - pos_);
    pos_ += len;
    std::string shown = peek_printable(start, pos_);
    error("illegal character " + shown, start, pos_);
  }

  std::string peek_printable(std::size_t start, std::size_t end) const {
    if (end - start == 1) {
      const auto c = static_cast<unsigned char>(src_[start]);
      if (c < 0x20 || c == 0x7F) {
        static constexpr char kHex[] = "0123456789ABCDEF";
        return std::string("0x") + kHex[c >> 4] + kHex[c & 0xF];
      }
    }
    return "'" + std::string(src_.substr(start, end - start)) + "'";
  }

  // Reads a quoted string starting at the opening quote. Returns false (and
  // reports) when it is unterminated or holds a NUL byte.
  bool lex_quote() {
    const std::size_t start = pos_;
    ++pos_;
    std::string text;
    bool has_nul = false;
    while (true) {
      if (at_end() || at_newline()) {
        error("unterminated string", start, pos_);
        return false;
      }
      char c = peek();
      if (c == '"') {
        ++pos_;
        break;
      }
      if (c == '\0') has_nul = true;
      if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] != '\n') {
        char e = src_[pos_ + 1];
        switch (e) {
          case 'n': text += '\n'; break;
          case 't': text += '\t'; break;
          case 'r': text += '\r'; break;
          case '"': text += '"'; break;
          case '\\': text += '\\'; break;
          default:
            text += '\\';
            text += e;
        }
        pos_ += 2;
        continue;
      }
      text += c;
      ++pos_;
    }
    if (has_nul) {
      error("NUL byte in string", start, pos_);
      return false;
    }
    push(TokenKind::Quote, start, pos_, std::move(text));
    return true;
  }

  void lex_number() {
    const std::size_t start = pos_;
    while (is_digit(peek())) ++pos_;
    if (peek() == '.' && is_digit(peek(1))) {
      ++pos_;
      while (is_digit(peek())) ++pos_;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
      pos_ += is_digit(peek(1)) ? 1 : 2;
      while (is_digit(peek())) ++pos_;
    }
    push(TokenKind::Num, start, pos_, std::string(src_.substr(start, pos_ - start)));
  }

  void lex_identifier() {
    const std::size_t start = pos_;
    while (is_ident_char(peek())) ++pos_;
    std::string_view word = src_.substr(start, pos_ - start);
    for (const auto& [kw, kind] : kKeywords) {
      if (iequals(word, kw)) {
        if (kind == TokenKind::Task && !line_has_significant_) task_header_pending_ = true;
        push(kind, start, pos_, std::string(kw));
        return;
      }
    }
    push(TokenKind::Id, start, pos_, std::string(word));
  }

  void lex_plan_token() {
    const char c = peek();
    if (at_newline()) return lex_newline();
    if (is_blank(c) || c == '\r') return lex_whitespace();
    if (c == '#') return lex_comment();
    if (c == '"') {
      lex_quote();
      return;
    }
    if (is_digit(c)) return lex_number();
    if (is_ident_start(c)) return lex_identifier();
    const std::size_t start = pos_;
    TokenKind kind;
    switch (c) {
      case ';': kind = TokenKind::Semi; break;
      case '+': kind = TokenKind::Plus; break;
      case '-': kind = TokenKind::Minus; break;
      case '*': kind = TokenKind::Times; break;
      case '(': kind = TokenKind::LParen; break;
      case ')': kind = TokenKind::RParen; break;
      default: return lex_illegal();
    }
    ++pos_;
    push(kind, start, pos_);
  }

  // Task bodies are line oriented: a leading command word followed either by
  // whitespace-separated arguments or, for execute, the raw rest of the line.
  void lex_task_line() {
    bool first_word = true;
    bool raw_rest = false;
    while (!at_end()) {
      const char c = peek();
      if (at_newline()) {
        lex_newline();
        return;
      }
      if (is_blank(c) || c == '\r') {
        lex_whitespace();
        continue;
      }
      if (raw_rest) {
        lex_raw();
        continue;
      }
      if (c == '#') {
        lex_comment();
        continue;
      }
      if (c == '"') {
        lex_quote();
        first_word = false;
        continue;
      }
      if (c == '\0') {
        lex_illegal();
        continue;
      }
      const std::size_t start = pos_;
      while (!at_end() && !at_newline() && !is_blank(peek()) && peek() != '\r' &&
             peek() != '\0')
        ++pos_;
      std::string_view word = src_.substr(start, pos_ - start);
      if (first_word && iequals(word, "endtask")) {
        push(TokenKind::EndTask, start, pos_, "endtask");
        mode_ = Mode::Plan;
        return;
      }
      push(TokenKind::Word, start, pos_, std::string(word));
      if (first_word && (iequals(word, "execute") || iequals(word, "node:execute")))
        raw_rest = true;
      first_word = false;
    }
  }

  void lex_raw() {
    const std::size_t start = pos_;
    std::size_t end = start;
    while (!at_end() && !at_newline()) {
      if (peek() == '\0') break;
      ++pos_;
      if (!is_blank(src_[pos_ - 1]) && src_[pos_ - 1] != '\r') end = pos_;
    }
    if (end > start) {
      push(TokenKind::Raw, start, end, std::string(src_.substr(start, end - start)));
      if (pos_ > end) push(TokenKind::Whitespace, end, pos_);
    } else if (pos_ > start) {
      push(TokenKind::Whitespace, start, pos_);
    }
    if (!at_end() && peek() == '\0') lex_illegal();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Mode mode_ = Mode::Plan;
  bool task_header_pending_ = false;
  bool line_has_significant_ = false;
  LexResult out_;
};

}  // namespace

std::string_view to_string(TokenKind kind) {
  for (const auto& [kw, k] : kKeywords)
    if (k == kind) return kw;
  switch (kind) {
    case TokenKind::Id: return "identifier";
    case TokenKind::Quote: return "string";
    case TokenKind::Num: return "number";
    case TokenKind::Semi: return "';'";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Times: return "'*'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Newline: return "newline";
    case TokenKind::Whitespace: return "whitespace";
    case TokenKind::Comment: return "comment";
    case TokenKind::Word: return "word";
    case TokenKind::Raw: return "command line";
    case TokenKind::Eof: return "end of input";
    default: return "token";
  }
}

LexResult lex_plan(std::string_view source) { return Lexer(source).run(); }

}  // namespace vpt
