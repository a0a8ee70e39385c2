#pragma once

// RVL: the line-oriented analysis script language. One statement per
// physical line; comments and blank lines are kept as statements so that
// line numbers survive a parse/format round trip.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rv/error.hpp"

namespace rv::dsl {

struct Expr;

struct NumberLit {
  double value = 0.0;
  bool operator==(const NumberLit&) const = default;
};

struct StringLit {
  std::string value;
  bool operator==(const StringLit&) const = default;
};

struct Ident {
  std::string name;
  bool operator==(const Ident&) const = default;
};

// table.column
struct ColumnRef {
  std::string table;
  std::string column;
  bool operator==(const ColumnRef&) const = default;
};

struct Call {
  std::string name;
  std::vector<Expr> args;
  bool operator==(const Call&) const;
};

// response ~ p1 + p2 + ...
struct Formula {
  std::string response;
  std::vector<std::string> predictors;
  bool operator==(const Formula&) const = default;
};

struct Expr {
  std::variant<NumberLit, StringLit, Ident, ColumnRef, Call, Formula> node;
  bool operator==(const Expr&) const = default;
};

inline bool Call::operator==(const Call& o) const { return name == o.name && args == o.args; }

enum class StmtKind { Load, Let, Print, SetMissing, Ci, CiBonf, Model, Comment, Blank };

std::string_view to_string(StmtKind kind);

// load NAME = csv("path")
struct LoadStmt {
  std::string name;
  std::string path;
  bool operator==(const LoadStmt&) const = default;
};

// let NAME = EXPR
struct LetStmt {
  std::string name;
  Expr value;
  bool operator==(const LetStmt&) const = default;
};

// print EXPR
struct PrintStmt {
  Expr value;
  bool operator==(const PrintStmt&) const = default;
};

// set_missing TABLE.COL where == NUMBER
struct SetMissingStmt {
  ColumnRef target;
  double sentinel = 0.0;
  bool operator==(const SetMissingStmt&) const = default;
};

// ci diff_means(T.COL by T.GROUP) level P [k K] [label "text"]
// k is only written for ci_bonf; plain ci always has k == 1.
struct CiStmt {
  ColumnRef measure;
  ColumnRef group;
  double level = 0.95;
  long k = 1;
  std::optional<std::string> label;
  bool operator==(const CiStmt&) const = default;
};

// model NAME = lm(FORMULA) on TABLE
struct ModelStmt {
  std::string name;
  Formula formula;
  std::string table;
  bool operator==(const ModelStmt&) const = default;
};

// Comment text excludes the leading '#'.
struct CommentStmt {
  std::string text;
  bool operator==(const CommentStmt&) const = default;
};

struct BlankStmt {
  bool operator==(const BlankStmt&) const = default;
};

using Payload = std::variant<LoadStmt, LetStmt, PrintStmt, SetMissingStmt, CiStmt, ModelStmt,
                             CommentStmt, BlankStmt>;

struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct Stmt {
  std::size_t line_no = 0;
  StmtKind kind = StmtKind::Blank;
  Payload payload = BlankStmt{};
  // Trailing `# ...` after a statement, without the '#'.
  std::optional<std::string> trailing_comment;
  Span span;

  // Structural equality: spans are ignored.
  bool operator==(const Stmt& o) const {
    return line_no == o.line_no && kind == o.kind && payload == o.payload &&
           trailing_comment == o.trailing_comment;
  }
};

struct Script {
  std::vector<Stmt> lines;
  std::string source_name;

  std::size_t size() const noexcept { return lines.size(); }
  bool empty() const noexcept { return lines.empty(); }
  // 1-based.
  const Stmt& line(std::size_t line_no) const { return lines.at(line_no - 1); }

  bool operator==(const Script& o) const { return lines == o.lines; }
};

Script parse_script(std::string_view text, std::string source_name = "<input>");

// Parses one physical line; the result carries line_no. Errors report that line.
Stmt parse_line(std::string_view text, std::size_t line_no);

Expr parse_expr(std::string_view text);

std::string format_script(const Script& script);
std::string format_stmt(const Stmt& stmt);
std::string format_expr(const Expr& expr);

// Canonical rendering of an identifier-or-quoted name and of a number literal.
std::string format_name(std::string_view name);
std::string format_number(double value);
bool is_identifier(std::string_view text) noexcept;

// Renumbers lines 1..n in place.
void renumber(Script& script);

}  // namespace rv::dsl
