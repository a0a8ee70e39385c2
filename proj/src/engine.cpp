#include "rv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rv/render.hpp"

namespace rv::engine {

namespace {

using dsl::Expr;

struct Interpreter {
  SessionState& s;
  std::size_t line;

  [[noreturn]] void fail(const std::string& message) const { throw RunError(line, message); }

  const Value& lookup(const std::string& name) const {
    const auto it = s.env.find(name);
    if (it == s.env.end()) fail("unknown identifier '" + name + "'");
    return it->second;
  }

  std::string resolve_table_name(const std::string& name) const {
    std::string current = name;
    for (int hops = 0; hops < 64; ++hops) {
      const Value& v = lookup(current);
      if (std::holds_alternative<Table>(v)) return current;
      if (const auto* ref = std::get_if<TableRef>(&v)) {
        current = ref->name;
        continue;
      }
      fail("'" + name + "' is not a table");
    }
    fail("table alias cycle at '" + name + "'");
  }

  Table& table(const std::string& name) { return std::get<Table>(s.env.at(resolve_table_name(name))); }

  const MaskedVector& column(const dsl::ColumnRef& ref) {
    const Table& t = table(ref.table);
    const Column* c = t.find(ref.column);
    if (c == nullptr) fail("table '" + ref.table + "' has no column '" + ref.column + "'");
    return c->data;
  }

  Value eval(const Expr& e) {
    return std::visit(
        [&](const auto& node) -> Value {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, dsl::NumberLit>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, dsl::StringLit>) {
            fail("a string is not a value here");
          } else if constexpr (std::is_same_v<T, dsl::Ident>) {
            const Value& v = lookup(node.name);
            if (std::holds_alternative<Table>(v)) return TableRef{node.name};
            return v;
          } else if constexpr (std::is_same_v<T, dsl::ColumnRef>) {
            return column(node);
          } else if constexpr (std::is_same_v<T, dsl::Formula>) {
            fail("a formula is only allowed inside lm(...)");
          } else {
            return call(node);
          }
        },
        e.node);
  }

  void arity(const dsl::Call& c, std::size_t lo, std::size_t hi) const {
    if (c.args.size() < lo || c.args.size() > hi) {
      const std::string want = lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi);
      fail(c.name + "() takes " + want + " argument(s), got " + std::to_string(c.args.size()));
    }
  }

  MaskedVector vector_arg(const dsl::Call& c, std::size_t i) {
    Value v = eval(c.args[i]);
    if (auto* vec = std::get_if<MaskedVector>(&v)) return std::move(*vec);
    if (auto* d = std::get_if<double>(&v)) return MaskedVector(std::vector<double>{*d});
    fail(c.name + "(): argument " + std::to_string(i + 1) + " must be a column or vector");
  }

  std::string table_arg(const dsl::Call& c, std::size_t i) {
    const Value v = eval(c.args[i]);
    if (const auto* ref = std::get_if<TableRef>(&v)) return resolve_table_name(ref->name);
    fail(c.name + "(): argument " + std::to_string(i + 1) + " must be a table");
  }

  double number_arg(const dsl::Call& c, std::size_t i) {
    const Value v = eval(c.args[i]);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    fail(c.name + "(): argument " + std::to_string(i + 1) + " must be a number");
  }

  std::pair<std::string, stats::OlsFit> model_arg(const dsl::Call& c, std::size_t i) {
    const auto* id = std::get_if<dsl::Ident>(&c.args[i].node);
    const Value v = eval(c.args[i]);
    if (const auto* f = std::get_if<stats::OlsFit>(&v)) return {id ? id->name : std::string("model"), *f};
    fail(c.name + "(): argument " + std::to_string(i + 1) + " must be a fitted model");
  }

  template <typename F>
  auto guarded(F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const StatsError& e) {
      fail(e.what());
    }
  }

  Value call(const dsl::Call& c) {
    const std::string& fn = c.name;
    if (fn == "ranges") {
      arity(c, 1, 1);
      const std::string name = table_arg(c, 0);
      return guarded([&] { return stats::column_ranges(table(name)); });
    }
    if (fn == "nrow") {
      arity(c, 1, 1);
      return static_cast<double>(table(table_arg(c, 0)).nrow());
    }
    if (fn == "mean" || fn == "sd") {
      arity(c, 1, 1);
      const MaskedVector v = vector_arg(c, 0);
      const auto m = guarded([&] { return stats::mean_sd(v); });
      if (fn == "sd" && m.n < 2) fail("sd() needs at least two non-missing values");
      return fn == "mean" ? m.mean : m.sd;
    }
    if (fn == "median") {
      arity(c, 1, 1);
      const MaskedVector v = vector_arg(c, 0);
      return guarded([&] { return stats::median(v); });
    }
    if (fn == "n") {
      arity(c, 1, 1);
      return static_cast<double>(vector_arg(c, 0).count_present());
    }
    if (fn == "nmiss") {
      arity(c, 1, 1);
      return static_cast<double>(vector_arg(c, 0).count_missing());
    }
    if (fn == "mad_scores") {
      arity(c, 1, 1);
      const MaskedVector v = vector_arg(c, 0);
      return guarded([&] { return stats::mad_outlier_scores(v); });
    }
    if (fn == "summary") {
      arity(c, 1, 1);
      return model_arg(c, 0).second;
    }
    if (fn == "coef_audit") {
      arity(c, 1, 4);
      auto [name, fit] = model_arg(c, 0);
      audit::CoefAuditConfig cfg;
      if (c.args.size() > 1) cfg.level = number_arg(c, 1);
      if (c.args.size() > 2) cfg.practical_threshold = number_arg(c, 2);
      if (c.args.size() > 3) cfg.practical_delta = number_arg(c, 3);
      AuditTable out{name, guarded([&] { return audit::coef_audit(fit, cfg); })};
      s.correction_used = true;
      return out;
    }
    fail("unknown function '" + fn + "'");
  }

  void emit(std::string text) { s.output_log.push_back(OutputEntry{line, std::move(text)}); }

  void bind(const std::string& name, Value v) {
    s.env[name] = std::move(v);
    s.defined_at[name] = line;
  }

  void exec(const dsl::Stmt& st) {
    std::visit([&](const auto& p) { exec_payload(st, p); }, st.payload);
  }

  void exec_payload(const dsl::Stmt&, const dsl::LoadStmt& p) {
    std::filesystem::path path(p.path);
    if (path.is_relative()) path = s.data_dir / path;
    Table t;
    try {
      t = load_csv(path, p.name);
    } catch (const RunError& e) {
      fail(e.message());
    }
    emit("loaded " + p.name + ": " + std::to_string(t.nrow()) + " rows x " + std::to_string(t.ncol()) +
         " columns from \"" + p.path + "\"");
    bind(p.name, std::move(t));
  }

  void exec_payload(const dsl::Stmt&, const dsl::LetStmt& p) {
    Value v = eval(p.value);
    if (auto* ref = std::get_if<TableRef>(&v)) {
      ref->name = resolve_table_name(ref->name);
      if (ref->name == p.name) fail("cannot bind table '" + p.name + "' to itself");
    }
    bind(p.name, std::move(v));
  }

  void exec_payload(const dsl::Stmt&, const dsl::PrintStmt& p) {
    const Value v = eval(p.value);
    emit(render_value(v, s));
  }

  void exec_payload(const dsl::Stmt&, const dsl::SetMissingStmt& p) {
    column(p.target);
    Table& t = table(p.target.table);
    Column* c = t.find(p.target.column);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < c->data.size(); ++i) {
      if (!c->data.missing[i] && c->data.values[i] == p.sentinel) {
        c->data.missing[i] = true;
        ++changed;
      }
    }
    emit(p.target.table + "." + p.target.column + ": " + std::to_string(changed) + " value(s) equal to " +
         render::sig(p.sentinel) + " set to NA");
  }

  void exec_payload(const dsl::Stmt& st, const dsl::CiStmt& p) {
    const MaskedVector& y = column(p.measure);
    const MaskedVector& g = column(p.group);
    if (y.size() != g.size()) fail("measure and group columns have different lengths");

    std::set<double> levels;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g.missing[i]) levels.insert(g.values[i]);
    if (levels.size() != 2)
      fail("group column '" + p.group.column + "' must have exactly 2 distinct non-missing values, found " +
           std::to_string(levels.size()));
    const double low = *levels.begin();
    const double high = *levels.rbegin();

    MaskedVector hi_grp;
    MaskedVector lo_grp;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (g.missing[i] || y.missing[i]) continue;
      (g.values[i] == high ? hi_grp : lo_grp).push_back(y.values[i]);
    }
    const bool bonf = st.kind == dsl::StmtKind::CiBonf;
    const long k = bonf ? p.k : 1;
    const std::string label = p.label ? *p.label : p.measure.column;
    const stats::CiResult ci = guarded([&] { return stats::welch_ci(hi_grp, lo_grp, p.level, k, label); });

    if (bonf) {
      s.correction_used = true;
    } else {
      ++s.inference_count;
      s.inference_lines.push_back(line);
    }
    s.intervals.push_back(IntervalRecord{line, ci});
    emit(render::ci(ci, render::CiContext{p.group.column, high, low}));
  }

  void exec_payload(const dsl::Stmt&, const dsl::ModelStmt& p) {
    const Table& t = table(p.table);
    auto col = [&](const std::string& name) -> const MaskedVector& {
      const Column* c = t.find(name);
      if (c == nullptr) fail("table '" + p.table + "' has no column '" + name + "'");
      return c->data;
    };
    const MaskedVector& y = col(p.formula.response);
    std::vector<stats::Predictor> preds;
    for (const std::string& name : p.formula.predictors) preds.push_back({name, col(name)});
    stats::OlsFit fit = guarded([&] { return stats::ols_fit(y, preds, true); });
    emit("model " + p.name + " = lm(" + dsl::format_expr(Expr{p.formula}) + ") on " + p.table + ": n = " +
         std::to_string(fit.n) + ", p = " + std::to_string(fit.p) + ", " + std::to_string(fit.dropped) +
         " incomplete row(s) dropped");
    bind(p.name, std::move(fit));
  }

  void exec_payload(const dsl::Stmt&, const dsl::CommentStmt&) {}
  void exec_payload(const dsl::Stmt&, const dsl::BlankStmt&) {}
};

}  // namespace

SessionState new_session(dsl::Script script, std::filesystem::path data_dir) {
  dsl::renumber(script);
  SessionState s;
  s.script = std::move(script);
  s.data_dir = std::move(data_dir);
  return s;
}

SessionState run_to_line(const SessionState& s, std::size_t through_line) {
  if (through_line < s.next_line || through_line > s.script.size())
    throw RunError(0, "cannot run through line " + std::to_string(through_line) + ": next line is " +
                          std::to_string(s.next_line) + ", script has " + std::to_string(s.script.size()) +
                          " line(s)");
  SessionState next = s;
  for (std::size_t ln = s.next_line; ln <= through_line; ++ln) {
    Interpreter in{next, ln};
    in.exec(next.script.line(ln));
    next.next_line = ln + 1;
  }
  return next;
}

SessionState continue_run(const SessionState& s) {
  if (s.at_end()) throw RunError(0, "nothing to run");
  return run_to_line(s, s.script.size());
}

SessionState reset(const SessionState& s) { return new_session(s.script, s.data_dir); }

SessionState run_from(const SessionState& s, std::size_t from_line, std::size_t through_line) {
  if (from_line < 1 || from_line > s.next_line)
    throw RunError(0, "starting line " + std::to_string(from_line) + " must be between 1 and the next line (" +
                          std::to_string(s.next_line) + ")");
  SessionState base = from_line == s.next_line ? s : reset(s);
  if (from_line > 1 && base.next_line < from_line) base = run_to_line(base, from_line - 1);
  return run_to_line(base, through_line);
}

SessionState edit_line(const SessionState& s, std::size_t line_no, std::string_view new_text) {
  if (line_no < 1 || line_no > s.script.size() + 1)
    throw RunError(0, "line " + std::to_string(line_no) + " is outside 1.." + std::to_string(s.script.size() + 1));
  dsl::Stmt st = dsl::parse_line(new_text, line_no);
  dsl::Script script = s.script;
  if (line_no == script.size() + 1) script.lines.push_back(std::move(st));
  else script.lines[line_no - 1] = std::move(st);

  if (s.next_line <= line_no) {
    SessionState next = s;
    next.script = std::move(script);
    return next;
  }
  SessionState fresh = new_session(std::move(script), s.data_dir);
  if (line_no > 1) fresh = run_to_line(fresh, line_no - 1);
  return fresh;
}

std::vector<OutputEntry> outputs_since(const SessionState& s, std::size_t from_index) {
  if (from_index >= s.output_log.size()) return {};
  return {s.output_log.begin() + static_cast<std::ptrdiff_t>(from_index), s.output_log.end()};
}

std::string render_log(const std::vector<OutputEntry>& entries) {
  std::string out;
  for (const OutputEntry& e : entries) {
    const std::string prefix = "[L" + std::to_string(e.line) + "] ";
    std::size_t start = 0;
    while (true) {
      const std::size_t nl = e.text.find('\n', start);
      out += prefix;
      out.append(e.text, start, nl == std::string::npos ? std::string::npos : nl - start);
      out += '\n';
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  }
  return out;
}

std::string render_value(const Value& v, const SessionState& s) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) return render::scalar(x);
        else if constexpr (std::is_same_v<T, MaskedVector>) return render::vector(x);
        else if constexpr (std::is_same_v<T, Table>) return render::table(x);
        else if constexpr (std::is_same_v<T, TableRef>) {
          std::string name = x.name;
          for (int hops = 0; hops < 64; ++hops) {
            const auto it = s.env.find(name);
            if (it == s.env.end()) break;
            if (const auto* t = std::get_if<Table>(&it->second)) return render::table(*t);
            if (const auto* r = std::get_if<TableRef>(&it->second)) name = r->name;
            else break;
          }
          return "<dangling table " + x.name + ">";
        } else if constexpr (std::is_same_v<T, stats::OlsFit>) return render::fit(x);
        else if constexpr (std::is_same_v<T, stats::CiResult>) return render::ci(x);
        else if constexpr (std::is_same_v<T, stats::RangeTable>) return render::ranges(x);
        else return audit::render_audit_table(x.rows);
      },
      v);
}

}  // namespace rv::engine
