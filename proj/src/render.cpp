#include "rv/render.hpp"

#include <algorithm>
#include <cstdio>

namespace rv::render {

std::string sig(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

std::string align(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const std::string& cell = rows[r][c];
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? cell + pad : pad + cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    if (r + 1 < rows.size()) out += '\n';
  }
  return out;
}

std::string scalar(double v) { return sig(v); }

std::string vector(const MaskedVector& v) {
  constexpr std::size_t kPerLine = 10;
  if (v.size() == 0) return "(empty)";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += i % kPerLine == 0 ? "\n" : " ";
    out += v.is_missing(i) ? "NA" : sig(v.values[i]);
  }
  return out;
}

std::string table(const Table& t) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  for (const Column& c : t.columns()) header.push_back(c.name);
  rows.push_back(std::move(header));
  for (std::size_t r = 0; r < t.nrow(); ++r) {
    std::vector<std::string> row{std::to_string(r + 1)};
    for (const Column& c : t.columns())
      row.push_back(c.data.is_missing(r) ? "NA" : sig(c.data.values[r]));
    rows.push_back(std::move(row));
  }
  return align(rows);
}

std::string ranges(const stats::RangeTable& r) {
  std::vector<std::string> header{""}, lo{"min"}, hi{"max"};
  for (const auto& c : r.ranges) {
    header.push_back(c.column);
    lo.push_back(sig(c.min));
    hi.push_back(sig(c.max));
  }
  return align({header, lo, hi});
}

std::string fit(const stats::OlsFit& f) {
  std::vector<std::vector<std::string>> rows{{"", "Estimate", "Std. Error", "t value", "Pr(>|t|)"}};
  for (std::size_t j = 0; j < f.p; ++j)
    rows.push_back({f.coef_names[j], sig(f.est[j]), sig(f.se[j]), sig(f.t_stats[j], 6),
                    sig(f.p_values[j], 6)});
  std::string out = "Coefficients:\n" + align(rows);
  out += "\nResidual standard error: " + sig(f.sigma) + " on " + sig(f.df_resid) +
         " degrees of freedom";
  out += "\nn = " + std::to_string(f.n) + ", " + std::to_string(f.dropped) +
         " incomplete row(s) dropped";
  return out;
}

namespace {

std::string level_text(const stats::CiResult& ci) {
  std::string s = sig(ci.level_nominal * 100.0) + "%";
  if (ci.k_comparisons > 1) s += " Bonferroni k=" + std::to_string(ci.k_comparisons);
  return s;
}

std::string body(const stats::CiResult& ci) {
  return "estimate " + sig(ci.estimate) + ", " + level_text(ci) + " CI [" + sig(ci.lower) + ", " +
         sig(ci.upper) + "], Welch df " + sig(ci.df) + ", n " + std::to_string(ci.n1) + "/" +
         std::to_string(ci.n2);
}

}  // namespace

std::string ci(const stats::CiResult& ci, const CiContext& ctx) {
  return ci.label + " (" + ctx.group_column + " " + sig(ctx.high_group) + " - " +
         sig(ctx.low_group) + "): " + body(ci);
}

std::string ci(const stats::CiResult& c) { return c.label + ": " + body(c); }

}  // namespace rv::render
