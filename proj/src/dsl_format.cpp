#include <charconv>
#include <string>

#include "rv/dsl.hpp"

namespace rv::dsl {

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string format_ref(const ColumnRef& ref) { return ref.table + "." + format_name(ref.column); }

std::string format_formula(const Formula& f) {
  std::string out = format_name(f.response) + " ~ ";
  for (std::size_t i = 0; i < f.predictors.size(); ++i) {
    if (i > 0) out += " + ";
    out += format_name(f.predictors[i]);
  }
  return out;
}

struct ExprFormatter {
  std::string operator()(const NumberLit& n) const { return format_number(n.value); }
  std::string operator()(const StringLit& s) const { return quote(s.value); }
  std::string operator()(const Ident& id) const { return id.name; }
  std::string operator()(const ColumnRef& ref) const { return format_ref(ref); }
  std::string operator()(const Formula& f) const { return format_formula(f); }
  std::string operator()(const Call& call) const {
    std::string out = call.name + "(";
    for (std::size_t i = 0; i < call.args.size(); ++i) {
      if (i > 0) out += ", ";
      out += format_expr(call.args[i]);
    }
    return out + ")";
  }
};

struct StmtFormatter {
  StmtKind kind;

  std::string operator()(const LoadStmt& s) const {
    return "load " + s.name + " = csv(" + quote(s.path) + ")";
  }
  std::string operator()(const LetStmt& s) const { return "let " + s.name + " = " + format_expr(s.value); }
  std::string operator()(const PrintStmt& s) const { return "print " + format_expr(s.value); }
  std::string operator()(const SetMissingStmt& s) const {
    return "set_missing " + format_ref(s.target) + " where == " + format_number(s.sentinel);
  }
  std::string operator()(const CiStmt& s) const {
    const bool bonf = kind == StmtKind::CiBonf;
    std::string out = bonf ? "ci_bonf" : "ci";
    out += " diff_means(" + format_ref(s.measure) + " by " + format_ref(s.group) + ") level " +
           format_number(s.level);
    if (bonf) out += " k " + std::to_string(s.k);
    if (s.label) out += " label " + quote(*s.label);
    return out;
  }
  std::string operator()(const ModelStmt& s) const {
    return "model " + s.name + " = lm(" + format_formula(s.formula) + ") on " + s.table;
  }
  std::string operator()(const CommentStmt& s) const { return "#" + s.text; }
  std::string operator()(const BlankStmt&) const { return {}; }
};

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_name(std::string_view name) {
  return is_identifier(name) ? std::string(name) : quote(name);
}

std::string format_expr(const Expr& expr) { return std::visit(ExprFormatter{}, expr.node); }

std::string format_stmt(const Stmt& stmt) {
  std::string out = std::visit(StmtFormatter{stmt.kind}, stmt.payload);
  if (stmt.trailing_comment) out += " #" + *stmt.trailing_comment;
  return out;
}

std::string format_script(const Script& script) {
  std::string out;
  for (const Stmt& st : script.lines) {
    out += format_stmt(st);
    out += '\n';
  }
  return out;
}

}  // namespace rv::dsl
