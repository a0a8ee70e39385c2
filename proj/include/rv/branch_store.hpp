#pragma once

// Numbered, described, lineage-tracked script versions stored as
// self-describing `<base>.<n>.rvl` files:
//
//   #: desc <description>
//   #: parent <base>.<m>          (absent for the original)
//   #: created <YYYY-MM-DDTHH:MM:SSZ>
//   #: hash <16 lowercase hex digits, FNV-1a 64 of the body>
//   <canonical script text>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rv/dsl.hpp"

namespace rv::store {

struct BranchId {
  std::string base;
  long number = 0;
  std::string str() const { return base + "." + std::to_string(number); }
  bool operator==(const BranchId&) const = default;
};

struct BranchRecord {
  std::string base;
  long number = 0;
  std::string description;
  std::optional<BranchId> parent;
  std::string created_at;
  std::string content_hash;

  BranchId id() const { return BranchId{base, number}; }
  bool operator==(const BranchRecord&) const = default;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

std::string iso8601_utc(std::chrono::system_clock::time_point tp);

// Branch file text for a record and canonical body.
std::string render_branch_file(const BranchRecord& rec, std::string_view body);

// Splits a branch file into its record (base/number from the arguments) and
// body. Throws IntegrityError when the header is malformed or the body hash
// does not match.
std::pair<BranchRecord, std::string> parse_branch_file(std::string_view text, std::string base, long number);

// `pima.3.rvl` -> {pima, 3}; `pima.rvl` -> nullopt.
std::optional<BranchId> parse_branch_filename(std::string_view filename);

struct DiffEntry {
  // 0 when the side has no line (pure insertion or deletion).
  std::size_t left_line = 0;
  std::size_t right_line = 0;
  std::optional<std::string> left;
  std::optional<std::string> right;

  // The line this change is reported at.
  std::size_t line_no() const noexcept { return left_line != 0 ? left_line : right_line; }
  bool operator==(const DiffEntry&) const = default;
};

// Minimal line diff (longest common subsequence). diff_lines(b, a) is the
// mirror of diff_lines(a, b).
std::vector<DiffEntry> diff_lines(const std::vector<std::string>& a, const std::vector<std::string>& b);

class BranchStore {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  explicit BranchStore(std::filesystem::path root, Clock clock = std::chrono::system_clock::now);

  const std::filesystem::path& root() const noexcept { return root_; }

  std::filesystem::path path_for(const BranchId& id) const;

  // Writes `<base>.0.rvl` for the loaded original if it does not exist yet.
  BranchRecord ensure_original(const dsl::Script& script, const std::string& base);

  // Writes `<base>.<n>.rvl` with n = 1 + max existing. Throws StoreError on
  // empty base/description, a description containing a newline, a missing
  // parent, or I/O failure.
  BranchRecord save_branch(const dsl::Script& script, const std::string& base, const std::string& description,
                           const std::optional<BranchId>& parent);

  std::pair<dsl::Script, BranchRecord> load_branch(const std::string& base, long number) const;

  std::vector<BranchRecord> list_branches(const std::string& base) const;

  std::vector<DiffEntry> diff_branches(const BranchId& a, const BranchId& b) const;

 private:
  std::vector<long> existing_numbers(const std::string& base) const;
  BranchRecord write_locked(const dsl::Script& script, const std::string& base, const std::string& description,
                            const std::optional<BranchId>& parent, std::optional<long> fixed_number);

  std::filesystem::path root_;
  Clock clock_;
};

}  // namespace rv::store
