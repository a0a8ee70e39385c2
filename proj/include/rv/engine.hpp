#pragma once

// Deterministic RVL interpreter. A SessionState is a value: every operation
// takes the current state and returns the next one, leaving the input
// untouched when it throws.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rv/coef_audit.hpp"
#include "rv/dsl.hpp"
#include "rv/stats.hpp"
#include "rv/table.hpp"

namespace rv::engine {

struct TableRef {
  std::string name;
  bool operator==(const TableRef&) const = default;
};

struct AuditTable {
  std::string model;
  std::vector<audit::CoefAuditRow> rows;
  bool operator==(const AuditTable&) const = default;
};

using Value = std::variant<double, MaskedVector, Table, TableRef, stats::OlsFit, stats::CiResult,
                           stats::RangeTable, AuditTable>;

struct OutputEntry {
  std::size_t line = 0;
  std::string text;
  bool operator==(const OutputEntry&) const = default;
};

struct IntervalRecord {
  std::size_t line = 0;
  stats::CiResult ci;
  bool operator==(const IntervalRecord&) const = default;
};

struct SessionState {
  dsl::Script script;
  // Relative `load` paths resolve against this directory.
  std::filesystem::path data_dir = ".";
  std::map<std::string, Value> env;
  // Line of the statement that last bound each name.
  std::map<std::string, std::size_t> defined_at;
  std::size_t next_line = 1;
  std::vector<OutputEntry> output_log;
  // Uncorrected CI statements executed and where they were.
  std::size_t inference_count = 0;
  std::vector<std::size_t> inference_lines;
  // Set once a ci_bonf or coef_audit has run.
  bool correction_used = false;
  std::vector<IntervalRecord> intervals;

  bool at_end() const noexcept { return next_line > script.size(); }
  bool operator==(const SessionState& o) const {
    return script == o.script && env == o.env && defined_at == o.defined_at &&
           next_line == o.next_line && output_log == o.output_log &&
           inference_count == o.inference_count && inference_lines == o.inference_lines &&
           correction_used == o.correction_used && intervals == o.intervals;
  }
};

SessionState new_session(dsl::Script script, std::filesystem::path data_dir = ".");

// Executes lines [next_line, through_line]. Throws RunError (state unchanged)
// when a statement fails or through_line is out of range.
SessionState run_to_line(const SessionState& s, std::size_t through_line);

// Runs to the end. Throws RunError "nothing to run" when already there.
SessionState continue_run(const SessionState& s);

SessionState reset(const SessionState& s);

// Rolls back to a fresh replay through from_line - 1 (requires
// 1 <= from_line <= next_line) and then runs from_line..through_line.
SessionState run_from(const SessionState& s, std::size_t from_line, std::size_t through_line);

// Replaces line line_no (or appends at size()+1). If the session had already
// executed line_no, it is rolled back to a fresh replay through line_no - 1.
// Throws ParseError with the script unchanged on bad text.
SessionState edit_line(const SessionState& s, std::size_t line_no, std::string_view new_text);

// Outputs produced since `from_index` in the log.
std::vector<OutputEntry> outputs_since(const SessionState& s, std::size_t from_index);

// `[L<line>] <text>` per physical output line, each terminated by '\n'.
std::string render_log(const std::vector<OutputEntry>& entries);

// Text produced by `print` for a value.
std::string render_value(const Value& v, const SessionState& s);

}  // namespace rv::engine
