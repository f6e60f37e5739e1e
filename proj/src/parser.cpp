#include "vpt/parser.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <string>

#include "vpt/lexer.hpp"
#include "vpt/param_model.hpp"

namespace vpt {
namespace {

constexpr int kMaxExprNesting = 200;

// Raised to unwind to the nearest statement boundary after a diagnostic has
// been recorded.
struct SyntaxError {};

// How a literal is interpreted depends on what it feeds.
enum class LiteralContext { Integer, Float, Text, File, Count };

LiteralContext context_for(ParamType t) {
  switch (t) {
    case ParamType::Integer: return LiteralContext::Integer;
    case ParamType::Float: return LiteralContext::Float;
    case ParamType::Text: return LiteralContext::Text;
    case ParamType::File: return LiteralContext::File;
  }
  return LiteralContext::Text;
}

bool is_integral_numeral(std::string_view lexeme) {
  return lexeme.find_first_of(".eE") == std::string_view::npos;
}

std::string_view strip_plus(std::string_view s) {
  return (!s.empty() && s.front() == '+') ? s.substr(1) : s;
}

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {
    LexResult lexed = lex_plan(source);
    diags_ = std::move(lexed.diagnostics);
    for (Token& t : lexed.tokens)
      if (!t.is_trivia()) toks_.push_back(std::move(t));
  }

  ParseResult run() {
    while (cur().kind != TokenKind::Eof) {
      try {
        switch (cur().kind) {
          case TokenKind::Newline: advance(); break;
          case TokenKind::Parameter: parse_plan_step(); break;
          case TokenKind::Task: parse_task_block(); break;
          default:
            fail("expected 'parameter' or 'task', found " + describe(cur()));
        }
      } catch (const SyntaxError&) {
        recover_statement();
      }
    }
    ParseResult result;
    result.diagnostics = std::move(diags_);
    if (!has_errors(result.diagnostics)) {
      result.plan = std::move(plan_);
      result.param_spans = std::move(param_spans_);
      result.task_spans = std::move(task_spans_);
    }
    return result;
  }

  Expr run_expression() {
    if (!diags_.empty()) throw Error(diags_.front());
    try {
      Expr e = parse_expr(0);
      if (cur().kind != TokenKind::Eof) fail("unexpected " + describe(cur()) + " after expression");
      return e;
    } catch (const SyntaxError&) {
      throw Error(diags_.front());
    }
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::Newline:
      case TokenKind::Eof: return std::string(to_string(t.kind));
      default: return "'" + t.lexeme + "'";
    }
  }

  [[noreturn]] void fail(std::string message) { fail_at(cur().span, std::move(message)); }

  [[noreturn]] void fail_at(Span span, std::string message) {
    diags_.push_back(make_error(code::kParse, std::move(message), span));
    throw SyntaxError{};
  }

  const Token& expect(TokenKind kind, std::string_view what) {
    if (cur().kind != kind)
      fail("expected " + std::string(what) + ", found " + describe(cur()));
    return advance();
  }

  void recover_statement() {
    while (cur().kind != TokenKind::Eof) {
      const TokenKind k = advance().kind;
      if (k == TokenKind::Semi || k == TokenKind::EndTask) return;
    }
  }

  // ---- parameters -------------------------------------------------------

  void parse_plan_step() {
    const std::size_t start = cur().span.start;
    advance();  // parameter
    const Token& name = expect(TokenKind::Id, "parameter name");
    ParamDef param;
    param.name = name.text;
    param.origin = ParamOrigin::Imported;

    if (cur().kind == TokenKind::Label) {
      advance();
      param.label = expect(TokenKind::Quote, "quoted label").text;
    } else if (cur().kind == TokenKind::Quote) {
      param.label = advance().text;
    }

    switch (cur().kind) {
      case TokenKind::Integer: param.ptype = ParamType::Integer; break;
      case TokenKind::Float: param.ptype = ParamType::Float; break;
      case TokenKind::Text: param.ptype = ParamType::Text; break;
      case TokenKind::File: param.ptype = ParamType::File; break;
      default: fail("expected type (integer, float, text or file), found " + describe(cur()));
    }
    advance();

    param.domain = parse_domain(param.ptype);
    const Token& semi = expect(TokenKind::Semi, "';'");

    if (!seen_params_.insert(param.name).second) {
      diags_.push_back(make_error(code::kDupParam,
                                  "duplicate parameter '" + param.name + "'", name.span));
      return;
    }
    plan_.params.push_back(std::move(param));
    param_spans_.push_back({start, semi.span.end});
  }

  Domain parse_domain(ParamType ptype) {
    const LiteralContext ctx = context_for(ptype);
    switch (cur().kind) {
      case TokenKind::Default:
        advance();
        return DefaultDomain{parse_value(ctx)};
      case TokenKind::Range: {
        advance();
        RangeDomain range;
        expect(TokenKind::From, "'from'");
        range.from = parse_value(ctx);
        expect(TokenKind::To, "'to'");
        range.to = parse_value(ctx);
        if (cur().kind == TokenKind::Step) {
          advance();
          range.refine = StepRefine{parse_value(ctx)};
        } else if (cur().kind == TokenKind::Points) {
          advance();
          range.refine = PointsRefine{parse_value(LiteralContext::Count)};
        }
        return range;
      }
      case TokenKind::Select: {
        advance();
        if (cur().kind == TokenKind::AnyOf) {
          advance();
          SelectAnyDomain any;
          any.values = parse_value_list(ctx);
          if (cur().kind == TokenKind::Default) {
            advance();
            any.defaults = parse_value_list(ctx);
          }
          return any;
        }
        if (cur().kind == TokenKind::OneOf) {
          advance();
          SelectOneDomain one;
          one.values = parse_value_list(ctx);
          if (cur().kind == TokenKind::Default) {
            advance();
            one.default_value = parse_value(ctx);
          }
          return one;
        }
        fail("expected 'anyof' or 'oneof', found " + describe(cur()));
      }
      case TokenKind::Random: {
        advance();
        RandomDomain random;
        expect(TokenKind::From, "'from'");
        random.from = parse_value(ctx);
        expect(TokenKind::To, "'to'");
        random.to = parse_value(ctx);
        if (cur().kind == TokenKind::Points) {
          advance();
          random.points = parse_value(LiteralContext::Count);
        }
        return random;
      }
      case TokenKind::Compute:
        advance();
        return ComputeDomain{parse_expr(0)};
      case TokenKind::Jitp:
        advance();
        return JitpDomain{expect(TokenKind::Quote, "quoted jitp expression").text};
      default:
        fail("expected domain (default, range, select, random, compute or jitp), found " +
             describe(cur()));
    }
  }

  // A '+' or '-' written directly against a numeral is part of the literal.
  bool at_signed_number() const {
    if (cur().kind != TokenKind::Plus && cur().kind != TokenKind::Minus) return false;
    if (pos_ + 1 >= toks_.size()) return false;
    const Token& next = toks_[pos_ + 1];
    return next.kind == TokenKind::Num && next.span.start == cur().span.end;
  }

  bool starts_value() const {
    const TokenKind k = cur().kind;
    return k == TokenKind::Id || k == TokenKind::Quote || k == TokenKind::Num ||
           at_signed_number();
  }

  // Consumes an optionally signed numeral as a single token.
  Token take_number() {
    if (!at_signed_number()) return advance();
    Token sign = advance();
    const Token& digits = advance();
    sign.kind = TokenKind::Num;
    sign.lexeme += digits.lexeme;
    sign.text = sign.lexeme;
    sign.span.end = digits.span.end;
    return sign;
  }

  std::vector<Value> parse_value_list(LiteralContext ctx) {
    std::vector<Value> values;
    values.push_back(parse_value(ctx));
    while (starts_value()) values.push_back(parse_value(ctx));
    return values;
  }

  Value parse_value(LiteralContext ctx) {
    if (!starts_value()) fail("expected value, found " + describe(cur()));
    const Token t = cur().kind == TokenKind::Num || at_signed_number() ? take_number() : advance();
    if (t.kind != TokenKind::Num)
      return ctx == LiteralContext::File ? Value::file(t.text) : Value::text(t.text);
    if (ctx != LiteralContext::Float && is_integral_numeral(t.lexeme))
      return Value::integer(integer_literal(t));
    return Value::real(real_literal(t));
  }

  std::int64_t integer_literal(const Token& t) {
    std::string_view s = strip_plus(t.lexeme);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      diags_.push_back(make_error(code::kOverflow, "integer literal out of range", t.span));
      throw SyntaxError{};
    }
    return v;
  }

  double real_literal(const Token& t) {
    std::string_view s = strip_plus(t.lexeme);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      diags_.push_back(make_error(code::kOverflow, "numeric literal out of range", t.span));
      throw SyntaxError{};
    }
    return v;
  }

  // expr   -> expr (PLUS|MINUS) term | term
  // term   -> term TIMES factor | factor
  // factor -> NUMBER | LPAREN expr RPAREN
  Expr parse_expr(int nesting) {
    Expr lhs = parse_term(nesting);
    while (cur().kind == TokenKind::Plus || cur().kind == TokenKind::Minus) {
      const auto op = advance().kind == TokenKind::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      lhs = Expr::binary(op, std::move(lhs), parse_term(nesting));
    }
    return lhs;
  }

  Expr parse_term(int nesting) {
    Expr lhs = parse_factor(nesting);
    while (cur().kind == TokenKind::Times) {
      advance();
      lhs = Expr::binary(Expr::Kind::Mul, std::move(lhs), parse_factor(nesting));
    }
    return lhs;
  }

  Expr parse_factor(int nesting) {
    if (cur().kind == TokenKind::Num || at_signed_number())
      return Expr::number(real_literal(take_number()));
    if (cur().kind == TokenKind::LParen) {
      if (nesting >= kMaxExprNesting) fail("expression nested too deeply");
      advance();
      Expr inner = parse_expr(nesting + 1);
      expect(TokenKind::RParen, "')'");
      return inner;
    }
    fail("expected number or '(', found " + describe(cur()));
  }

  // ---- tasks --------------------------------------------------------------

  void parse_task_block() {
    const std::size_t start = cur().span.start;
    advance();  // task
    const Token& name = expect(TokenKind::Id, "task name");
    expect(TokenKind::Newline, "newline after task name");
    TaskDef task;
    task.name = name.text;

    while (true) {
      const Token& t = cur();
      if (t.kind == TokenKind::EndTask) break;
      if (t.kind == TokenKind::Newline) {
        advance();
        continue;
      }
      if (t.kind == TokenKind::Eof) fail("expected 'endtask' before end of input");
      try {
        task.commands.push_back(parse_command());
      } catch (const SyntaxError&) {
        recover_line();
      }
    }
    const Token& end = advance();  // endtask

    if (!seen_tasks_.insert(task.name).second) {
      diags_.push_back(
          make_error(code::kDupTask, "duplicate task '" + task.name + "'", name.span));
      return;
    }
    plan_.tasks.push_back(std::move(task));
    task_spans_.push_back({start, end.span.end});
  }

  void recover_line() {
    while (cur().kind != TokenKind::Eof && cur().kind != TokenKind::EndTask) {
      if (advance().kind == TokenKind::Newline) return;
    }
  }

  std::string parse_path_word(std::string_view what) {
    const Token& t = cur();
    if (t.kind != TokenKind::Word && t.kind != TokenKind::Quote)
      fail("expected " + std::string(what) + ", found " + describe(t));
    advance();
    return t.text;
  }

  Location parse_location_arg(std::string_view what) {
    const Span span = cur().span;
    Location loc = parse_location(parse_path_word(what));
    if (loc.path.empty()) fail_at(span, "empty path in " + std::string(what));
    return loc;
  }

  void end_of_command() {
    if (cur().kind == TokenKind::Newline) {
      advance();
      return;
    }
    fail("expected end of line, found " + describe(cur()));
  }

  TaskCommand parse_command() {
    const Token& head = cur();
    if (head.kind != TokenKind::Word) fail("expected task command, found " + describe(head));
    std::string verb;
    for (char c : head.text) verb += (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
    advance();

    if (verb == "copy") {
      CopyCommand copy;
      copy.src = parse_location_arg("copy source");
      copy.dst = parse_location_arg("copy destination");
      end_of_command();
      return copy;
    }
    if (verb == "execute" || verb == "node:execute") {
      ExecuteCommand exec;
      exec.on_node = verb == "node:execute";
      exec.command_line = expect(TokenKind::Raw, "command line").text;
      end_of_command();
      return exec;
    }
    if (verb == "substitute") {
      SubstituteCommand sub;
      const Span skel_span = cur().span;
      sub.skeleton = parse_path_word("skeleton path");
      if (parse_location(sub.skeleton).path.empty()) fail_at(skel_span, "empty skeleton path");
      const Span out_span = cur().span;
      sub.output = parse_path_word("output path");
      if (parse_location(sub.output).path.empty()) fail_at(out_span, "empty output path");
      end_of_command();
      return sub;
    }
    fail_at(head.span, "unknown task command '" + head.text + "'");
  }

  std::string_view source_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Diagnostics diags_;
  Plan plan_;
  std::vector<Span> param_spans_;
  std::vector<Span> task_spans_;
  std::set<std::string> seen_params_;
  std::set<std::string> seen_tasks_;
};

}  // namespace

ParseResult parse_plan_syntax(std::string_view source) { return Parser(source).run(); }

ParseResult parse_plan(std::string_view source) {
  ParseResult result = parse_plan_syntax(source);
  if (!result.ok()) return result;

  Diagnostics semantic;
  for (std::size_t i = 0; i < result.plan->params.size(); ++i) {
    for (Diagnostic d : validate_param(result.plan->params[i])) {
      d.span = result.param_spans[i];
      semantic.push_back(std::move(d));
    }
  }
  for (std::size_t i = 0; i < result.plan->tasks.size(); ++i) {
    for (Diagnostic d : validate_task(result.plan->tasks[i])) {
      d.span = result.task_spans[i];
      semantic.push_back(std::move(d));
    }
  }
  if (has_errors(semantic)) {
    result.plan.reset();
    result.param_spans.clear();
    result.task_spans.clear();
  }
  result.diagnostics.insert(result.diagnostics.end(), semantic.begin(), semantic.end());
  return result;
}

Expr parse_expr(std::string_view source) { return Parser(source).run_expression(); }

}  // namespace vpt
