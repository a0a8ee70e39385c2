#include <cmath>
#include <string>
#include <utility>

#include "rv/dsl.hpp"
#include "rv/lexer.hpp"

namespace rv::dsl {

std::string_view to_string(StmtKind kind) {
  switch (kind) {
    case StmtKind::Load: return "load";
    case StmtKind::Let: return "let";
    case StmtKind::Print: return "print";
    case StmtKind::SetMissing: return "set_missing";
    case StmtKind::Ci: return "ci";
    case StmtKind::CiBonf: return "ci_bonf";
    case StmtKind::Model: return "model";
    case StmtKind::Comment: return "comment";
    case StmtKind::Blank: return "blank";
  }
  return "?";
}

bool is_identifier(std::string_view text) noexcept {
  if (text.empty()) return false;
  auto start = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!start(text[0])) return false;
  for (char c : text.substr(1))
    if (!start(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

void renumber(Script& script) {
  for (std::size_t i = 0; i < script.lines.size(); ++i) script.lines[i].line_no = i + 1;
}

namespace {

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  return s;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::size_t line_no) : toks_(std::move(toks)), line_no_(line_no) {}

  Stmt statement() {
    Stmt st;
    st.line_no = line_no_;
    const Token& first = peek();
    if (first.kind == TokenKind::End) {
      st.kind = StmtKind::Blank;
      st.payload = BlankStmt{};
      return st;
    }
    if (first.kind == TokenKind::Comment) {
      st.kind = StmtKind::Comment;
      st.payload = CommentStmt{rstrip(first.text)};
      return st;
    }
    if (first.kind != TokenKind::Ident) fail(kStatementKeywords, "expected a statement");

    const std::string kw = first.text;
    if (kw == "load") {
      advance();
      LoadStmt s;
      s.name = expect_ident("table name");
      expect(TokenKind::Assign);
      expect_keyword("csv");
      expect(TokenKind::LParen);
      s.path = expect(TokenKind::String).text;
      expect(TokenKind::RParen);
      st.kind = StmtKind::Load;
      st.payload = std::move(s);
    } else if (kw == "let") {
      advance();
      LetStmt s;
      s.name = expect_ident("variable name");
      expect(TokenKind::Assign);
      s.value = expr();
      st.kind = StmtKind::Let;
      st.payload = std::move(s);
    } else if (kw == "print") {
      advance();
      st.kind = StmtKind::Print;
      st.payload = PrintStmt{expr()};
    } else if (kw == "set_missing") {
      advance();
      SetMissingStmt s;
      s.target = column_ref();
      expect_keyword("where");
      expect(TokenKind::EqEq);
      s.sentinel = expect(TokenKind::Number).number;
      st.kind = StmtKind::SetMissing;
      st.payload = std::move(s);
    } else if (kw == "ci" || kw == "ci_bonf") {
      advance();
      const bool bonf = kw == "ci_bonf";
      st.kind = bonf ? StmtKind::CiBonf : StmtKind::Ci;
      st.payload = ci(bonf);
    } else if (kw == "model") {
      advance();
      ModelStmt s;
      s.name = expect_ident("model name");
      expect(TokenKind::Assign);
      expect_keyword("lm");
      expect(TokenKind::LParen);
      const Token& head = peek();
      if (head.kind != TokenKind::Ident && head.kind != TokenKind::String)
        fail({"identifier", "string"}, "expected a formula");
      std::string response = advance().text;
      if (peek().kind != TokenKind::Tilde) fail({"'~'"}, "expected a formula");
      s.formula = formula(std::move(response));
      expect(TokenKind::RParen);
      expect_keyword("on");
      s.table = expect_ident("table name");
      st.kind = StmtKind::Model;
      st.payload = std::move(s);
    } else {
      fail(kStatementKeywords, "unknown statement '" + kw + "'");
    }

    if (peek().kind == TokenKind::Comment) st.trailing_comment = rstrip(advance().text);
    if (peek().kind != TokenKind::End) fail({"end of line"}, "unexpected trailing input");
    return st;
  }

  Expr whole_expr() {
    Expr e = expr();
    if (peek().kind != TokenKind::End) fail({"end of input"}, "unexpected trailing input");
    return e;
  }

 private:
  inline static const std::vector<std::string> kStatementKeywords = {
      "load", "let", "print", "set_missing", "ci", "ci_bonf", "model", "'#'"};

  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail) const {
    throw ParseError(line_no_, peek().column, std::move(expected), detail);
  }

  const Token& expect(TokenKind kind) {
    if (peek().kind != kind) {
      fail({std::string(describe(kind))},
           "unexpected " + std::string(describe(peek().kind)));
    }
    return advance();
  }

  std::string expect_ident(const std::string& what) {
    if (peek().kind != TokenKind::Ident) fail({what}, "unexpected " + std::string(describe(peek().kind)));
    return advance().text;
  }

  void expect_keyword(const std::string& kw) {
    if (peek().kind != TokenKind::Ident || peek().text != kw)
      fail({"'" + kw + "'"}, "unexpected " + std::string(describe(peek().kind)));
    advance();
  }

  // Identifier or quoted name.
  std::string name() {
    const Token& t = peek();
    if (t.kind != TokenKind::Ident && t.kind != TokenKind::String)
      fail({"identifier", "string"}, "expected a name");
    if (t.text.empty()) fail({"identifier"}, "empty name");
    return advance().text;
  }

  ColumnRef column_ref() {
    ColumnRef ref;
    ref.table = expect_ident("table name");
    expect(TokenKind::Dot);
    ref.column = name();
    return ref;
  }

  CiStmt ci(bool bonf) {
    CiStmt s;
    expect_keyword("diff_means");
    expect(TokenKind::LParen);
    s.measure = column_ref();
    expect_keyword("by");
    s.group = column_ref();
    expect(TokenKind::RParen);
    expect_keyword("level");
    const Token& lvl = peek();
    s.level = expect(TokenKind::Number).number;
    if (!(s.level > 0.0 && s.level < 1.0))
      throw ParseError(line_no_, lvl.column, {"level in (0, 1)"}, "confidence level out of range");
    if (bonf) {
      expect_keyword("k");
      const Token& kt = peek();
      const double k = expect(TokenKind::Number).number;
      if (!(k >= 1.0) || std::floor(k) != k || k > 1e9)
        throw ParseError(line_no_, kt.column, {"positive integer"}, "invalid comparison count");
      s.k = static_cast<long>(k);
    }
    if (peek().kind == TokenKind::Ident && peek().text == "label") {
      advance();
      s.label = expect(TokenKind::String).text;
    }
    return s;
  }

  Formula formula(std::string response) {
    Formula f;
    f.response = std::move(response);
    expect(TokenKind::Tilde);
    f.predictors.push_back(name());
    while (peek().kind == TokenKind::Plus) {
      advance();
      f.predictors.push_back(name());
    }
    return f;
  }

  Expr expr() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number:
        return Expr{NumberLit{advance().number}};
      case TokenKind::String: {
        std::string s = advance().text;
        if (peek().kind == TokenKind::Tilde) {
          if (s.empty()) fail({"identifier"}, "empty name");
          return Expr{formula(std::move(s))};
        }
        return Expr{StringLit{std::move(s)}};
      }
      case TokenKind::Ident: {
        std::string id = advance().text;
        switch (peek().kind) {
          case TokenKind::LParen: {
            advance();
            Call call;
            call.name = std::move(id);
            if (peek().kind != TokenKind::RParen) {
              call.args.push_back(expr());
              while (peek().kind == TokenKind::Comma) {
                advance();
                call.args.push_back(expr());
              }
            }
            expect(TokenKind::RParen);
            return Expr{std::move(call)};
          }
          case TokenKind::Dot: {
            advance();
            return Expr{ColumnRef{std::move(id), name()}};
          }
          case TokenKind::Tilde:
            return Expr{formula(std::move(id))};
          default:
            return Expr{Ident{std::move(id)}};
        }
      }
      default:
        fail({"number", "string", "identifier"}, "expected an expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

// Returns the byte offset of the first invalid sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) len = 1;
    else if ((c & 0xE0) == 0xC0 && c >= 0xC2) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0 && c <= 0xF4) len = 4;
    else return i;
    if (i + len > s.size()) return i;
    for (std::size_t j = 1; j < len; ++j)
      if ((static_cast<unsigned char>(s[i + j]) & 0xC0) != 0x80) return i;
    i += len;
  }
  return std::string_view::npos;
}

}  // namespace

Stmt parse_line(std::string_view text, std::size_t line_no) {
  if (text.find('\n') != std::string_view::npos)
    throw ParseError(line_no, text.find('\n') + 1, {"end of line"}, "statement spans lines");
  if (const auto bad = find_invalid_utf8(text); bad != std::string_view::npos)
    throw ParseError(line_no, bad + 1, {}, "invalid UTF-8");
  Parser p(lex_line(text, line_no), line_no);
  Stmt st = p.statement();
  st.span = Span{0, text.size()};
  return st;
}

Script parse_script(std::string_view text, std::string source_name) {
  Script script;
  script.source_name = std::move(source_name);
  std::size_t offset = 0;
  std::size_t line_no = 1;
  while (offset < text.size()) {
    std::size_t nl = text.find('\n', offset);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(offset, nl - offset);
    Stmt st = parse_line(line, line_no);
    st.span = Span{offset, line.size()};
    script.lines.push_back(std::move(st));
    offset = nl + 1;
    ++line_no;
  }
  return script;
}

Expr parse_expr(std::string_view text) {
  if (const auto bad = find_invalid_utf8(text); bad != std::string_view::npos)
    throw ParseError(1, bad + 1, {}, "invalid UTF-8");
  if (text.find('\n') != std::string_view::npos)
    throw ParseError(1, text.find('\n') + 1, {"end of input"}, "expression spans lines");
  return Parser(lex_line(text, 1), 1).whole_expr();
}

}  // namespace rv::dsl
