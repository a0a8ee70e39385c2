#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rv::dsl {

enum class TokenKind {
  Ident,
  Number,
  String,
  LParen,
  RParen,
  Comma,
  Dot,
  Assign,   // =
  EqEq,     // ==
  Tilde,
  Plus,
  Comment,  // '#' to end of line; text excludes the '#'
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;    // identifier name, decoded string, number spelling, comment text
  double number = 0.0;
  std::size_t column = 1;  // 1-based byte column
};

std::string_view describe(TokenKind kind);

// Tokenizes a single line (no '\n' allowed). Throws ParseError on bad input.
std::vector<Token> lex_line(std::string_view line, std::size_t line_no);

}  // namespace rv::dsl
