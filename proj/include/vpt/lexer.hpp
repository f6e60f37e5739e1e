#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vpt/diagnostic.hpp"

namespace vpt {

enum class TokenKind {
  // keywords
  Parameter, Label, Integer, Float, Text, File, Default, Range, From, To, Step, Points,
  Select, AnyOf, OneOf, Random, Compute, Jitp, Task, EndTask,
  // literals
  Id, Quote, Num,
  // punctuation
  Semi, Plus, Minus, Times, LParen, RParen,
  // layout
  Newline, Whitespace, Comment,
  // task bodies: a bare word, and the raw remainder of an execute line
  Word, Raw,
  Eof,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string lexeme;  // exact source slice
  std::string text;    // decoded payload: unescaped quote body, word, raw line
  Span span;

  bool is_trivia() const {
    return kind == TokenKind::Whitespace || kind == TokenKind::Comment;
  }
};

struct LexResult {
  std::vector<Token> tokens;  // includes trivia; always ends with Eof
  Diagnostics diagnostics;    // E_LEX; spans cover the offending bytes
};

/// Tokenizes plan source. Every byte of `source` ends up in exactly one
/// token span or one diagnostic span.
LexResult lex_plan(std::string_view source);

}  // namespace vpt
