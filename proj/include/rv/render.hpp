#pragma once

// Pinned text rendering for everything that reaches the output log. The
// formats here are part of the replay contract: changing them changes
// every golden log.

#include <string>
#include <vector>

#include "rv/stats.hpp"
#include "rv/table.hpp"

namespace rv::render {

// printf("%.*g") with the C locale.
std::string sig(double value, int digits = 10);

// Right-aligned columns separated by two spaces; first column left-aligned.
std::string align(const std::vector<std::vector<std::string>>& rows);

std::string scalar(double v);
std::string vector(const MaskedVector& v);
std::string table(const Table& t);
std::string ranges(const stats::RangeTable& r);
std::string fit(const stats::OlsFit& f);

struct CiContext {
  std::string group_column;
  double high_group = 1.0;
  double low_group = 0.0;
};
std::string ci(const stats::CiResult& ci, const CiContext& ctx);
std::string ci(const stats::CiResult& ci);

}  // namespace rv::render
