#include "rv/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rv/error.hpp"

namespace rv {

std::size_t MaskedVector::count_missing() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), true));
}

std::vector<double> MaskedVector::present() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!missing[i]) out.push_back(values[i]);
  return out;
}

bool MaskedVector::operator==(const MaskedVector& o) const {
  if (values.size() != o.values.size() || missing != o.missing) return false;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!missing[i] && values[i] != o.values[i]) return false;
  return true;
}

void Table::add_column(std::string name, MaskedVector data) {
  if (data.values.size() != data.missing.size()) throw Error("column '" + name + "': mask length mismatch");
  if (!columns_.empty() && data.size() != nrow_)
    throw Error("column '" + name + "' has " + std::to_string(data.size()) + " rows, table has " +
                std::to_string(nrow_));
  if (find(name) != nullptr) throw Error("duplicate column '" + name + "'");
  if (columns_.empty()) nrow_ = data.size();
  columns_.push_back(Column{std::move(name), std::move(data)});
}

const Column* Table::find(std::string_view column) const {
  for (const Column& c : columns_)
    if (c.name == column) return &c;
  return nullptr;
}

Column* Table::find(std::string_view column) {
  for (Column& c : columns_)
    if (c.name == column) return &c;
  return nullptr;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Table parse_csv(std::string_view text, std::string table_name) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw RunError(0, "CSV has no header row");

  std::vector<std::string> names;
  for (std::string_view f : split_fields(lines[0])) {
    f = trim(f);
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    if (f.empty()) throw RunError(0, "CSV header has an empty column name");
    names.emplace_back(f);
  }

  std::vector<MaskedVector> cols(names.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (fields.size() != names.size())
      throw RunError(0, "CSV row " + std::to_string(r) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(names.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view cell = trim(fields[c]);
      if (cell == "NA") {
        cols[c].push_missing();
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw RunError(0, "CSV row " + std::to_string(r) + ", column '" + names[c] +
                              "': non-numeric cell '" + std::string(cell) + "'");
      cols[c].push_back(v);
    }
  }

  Table t(std::move(table_name));
  for (std::size_t c = 0; c < names.size(); ++c) {
    try {
      t.add_column(names[c], std::move(cols[c]));
    } catch (const RunError&) {
      throw;
    } catch (const Error& e) {
      throw RunError(0, e.what());
    }
  }
  return t;
}

Table load_csv(const std::filesystem::path& path, std::string table_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError(0, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), std::move(table_name));
}

}  // namespace rv
