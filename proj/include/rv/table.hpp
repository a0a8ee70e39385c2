#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rv {

// Numeric vector with an explicit missingness mask. The stored value of a
// missing cell is never read.
struct MaskedVector {
  std::vector<double> values;
  std::vector<bool> missing;

  MaskedVector() = default;
  explicit MaskedVector(std::vector<double> v) : values(std::move(v)), missing(values.size(), false) {}
  MaskedVector(std::vector<double> v, std::vector<bool> m) : values(std::move(v)), missing(std::move(m)) {}

  std::size_t size() const noexcept { return values.size(); }
  bool is_missing(std::size_t i) const { return missing[i]; }
  std::optional<double> at(std::size_t i) const {
    return missing[i] ? std::nullopt : std::optional<double>(values[i]);
  }
  std::size_t count_missing() const;
  std::size_t count_present() const { return size() - count_missing(); }
  // Non-missing cells in order.
  std::vector<double> present() const;

  void push_back(double v) {
    values.push_back(v);
    missing.push_back(false);
  }
  void push_missing() {
    values.push_back(0.0);
    missing.push_back(true);
  }

  // Equality ignores the stored value of missing cells.
  bool operator==(const MaskedVector& o) const;
};

struct Column {
  std::string name;
  MaskedVector data;
  bool operator==(const Column&) const = default;
};

class Table {
 public:
  Table() = default;
  explicit Table(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  std::size_t nrow() const noexcept { return nrow_; }
  std::size_t ncol() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  // Throws rv::Error when the length disagrees with nrow or the name is taken.
  void add_column(std::string name, MaskedVector data);

  const Column* find(std::string_view column) const;
  Column* find(std::string_view column);

  bool operator==(const Table&) const = default;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::size_t nrow_ = 0;
};

// Header row required; `NA` is the only missing token; every other cell must
// parse completely as a decimal number. Errors are rv::RunError with line 0;
// the engine rethrows them against the `load` line.
Table load_csv(const std::filesystem::path& path, std::string table_name);
Table parse_csv(std::string_view text, std::string table_name);

}  // namespace rv
