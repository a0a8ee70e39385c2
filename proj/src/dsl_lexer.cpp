#include "rv/lexer.hpp"

#include <charconv>
#include <cmath>

#include "rv/error.hpp"

namespace rv::dsl {

std::string_view describe(TokenKind kind) {
  switch (kind) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Comma: return "','";
    case TokenKind::Dot: return "'.'";
    case TokenKind::Assign: return "'='";
    case TokenKind::EqEq: return "'=='";
    case TokenKind::Tilde: return "'~'";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Comment: return "comment";
    case TokenKind::End: return "end of line";
  }
  return "?";
}

namespace {

bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
 public:
  Lexer(std::string_view line, std::size_t line_no) : src_(line), line_no_(line_no) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) break;
      const std::size_t start = pos_;
      const char c = src_[pos_];
      Token tok;
      tok.column = start + 1;
      if (c == '#') {
        tok.kind = TokenKind::Comment;
        tok.text = std::string(src_.substr(pos_ + 1));
        pos_ = src_.size();
      } else if (is_ident_start(c)) {
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        tok.kind = TokenKind::Ident;
        tok.text = std::string(src_.substr(start, pos_ - start));
      } else if (is_digit(c) || (c == '-' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
        lex_number(tok);
      } else if (c == '"') {
        lex_string(tok);
      } else {
        ++pos_;
        switch (c) {
          case '(': tok.kind = TokenKind::LParen; break;
          case ')': tok.kind = TokenKind::RParen; break;
          case ',': tok.kind = TokenKind::Comma; break;
          case '.': tok.kind = TokenKind::Dot; break;
          case '~': tok.kind = TokenKind::Tilde; break;
          case '+': tok.kind = TokenKind::Plus; break;
          case '=':
            if (pos_ < src_.size() && src_[pos_] == '=') {
              ++pos_;
              tok.kind = TokenKind::EqEq;
            } else {
              tok.kind = TokenKind::Assign;
            }
            break;
          default:
            throw ParseError(line_no_, start + 1, {},
                             std::string("unexpected character '") + c + "'");
        }
      }
      out.push_back(std::move(tok));
    }
    Token end;
    end.kind = TokenKind::End;
    end.column = src_.size() + 1;
    out.push_back(end);
    return out;
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r'))
      ++pos_;
  }

  void lex_number(Token& tok) {
    const std::size_t start = pos_;
    if (src_[pos_] == '-') ++pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      if (pos_ >= src_.size() || !is_digit(src_[pos_]))
        throw ParseError(line_no_, pos_ + 1, {"digit"}, "malformed number");
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !is_digit(src_[pos_]))
        throw ParseError(line_no_, pos_ + 1, {"digit"}, "malformed exponent");
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && is_ident_start(src_[pos_]))
      throw ParseError(line_no_, pos_ + 1, {}, "identifier cannot follow a number");
    const std::string_view spelling = src_.substr(start, pos_ - start);
    double value = 0.0;
    const auto res = std::from_chars(spelling.data(), spelling.data() + spelling.size(), value);
    if (res.ec != std::errc{} || !std::isfinite(value))
      throw ParseError(line_no_, start + 1, {}, "number out of range");
    tok.kind = TokenKind::Number;
    tok.text = std::string(spelling);
    tok.number = value;
  }

  void lex_string(Token& tok) {
    const std::size_t start = pos_;
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= src_.size())
        throw ParseError(line_no_, start + 1, {"'\"'"}, "unterminated string");
      const char c = src_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= src_.size())
          throw ParseError(line_no_, pos_ + 1, {}, "dangling escape");
        const char e = src_[pos_++];
        switch (e) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          default:
            throw ParseError(line_no_, pos_ - 1, {}, std::string("unknown escape '\\") + e + "'");
        }
      } else {
        value += c;
      }
    }
    tok.kind = TokenKind::String;
    tok.text = std::move(value);
  }

  std::string_view src_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Token> lex_line(std::string_view line, std::size_t line_no) {
  return Lexer(line, line_no).run();
}

}  // namespace rv::dsl
