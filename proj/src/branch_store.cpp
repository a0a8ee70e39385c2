#include "rv/branch_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "rv/error.hpp"

namespace rv::store {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_branch_file(const BranchRecord& rec, std::string_view body) {
  std::string out = "#: desc " + rec.description + "\n";
  if (rec.parent) out += "#: parent " + rec.parent->str() + "\n";
  out += "#: created " + rec.created_at + "\n";
  out += "#: hash " + rec.content_hash + "\n";
  out.append(body);
  return out;
}

namespace {

std::optional<long> parse_number(std::string_view s) {
  long v = 0;
  if (s.empty()) return std::nullopt;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

// Takes one '\n'-terminated line off the front of `text` if it starts with `prefix`.
std::optional<std::string> take_header(std::string_view& text, std::string_view prefix) {
  if (text.substr(0, prefix.size()) != prefix) return std::nullopt;
  const std::size_t nl = text.find('\n');
  if (nl == std::string_view::npos) return std::nullopt;
  std::string value(text.substr(prefix.size(), nl - prefix.size()));
  text.remove_prefix(nl + 1);
  return value;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void validate_base(const std::string& base) {
  if (base.empty()) throw StoreError("branch base name must not be empty");
  if (base.find('/') != std::string::npos || base.find('\n') != std::string::npos)
    throw StoreError("invalid branch base name '" + base + "'");
}

class LockFile {
 public:
  explicit LockFile(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw StoreError("cannot open lock file '" + path.string() + "': " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX) != 0) {
      const int err = errno;
      ::close(fd_);
      throw StoreError("cannot lock '" + path.string() + "': " + std::strerror(err));
    }
  }
  ~LockFile() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  int fd_ = -1;
};

// Creates `path` exclusively. Returns false if it already exists.
bool write_exclusive(const fs::path& path, const std::string& content) {
  const int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY | O_CLOEXEC, 0644);
  if (fd < 0) {
    if (errno == EEXIST) return false;
    throw StoreError("cannot create '" + path.string() + "': " + std::strerror(errno));
  }
  std::size_t done = 0;
  while (done < content.size()) {
    const ssize_t n = ::write(fd, content.data() + done, content.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw StoreError("write to '" + path.string() + "' failed: " + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::close(fd) != 0) throw StoreError("close of '" + path.string() + "' failed");
  return true;
}

}  // namespace

std::pair<BranchRecord, std::string> parse_branch_file(std::string_view text, std::string base, long number) {
  BranchRecord rec;
  rec.base = std::move(base);
  rec.number = number;
  const std::string where = rec.base + "." + std::to_string(number);

  auto desc = take_header(text, "#: desc ");
  if (!desc) throw IntegrityError(where + ": missing '#: desc' header");
  rec.description = std::move(*desc);
  if (auto parent = take_header(text, "#: parent ")) {
    const auto id = parse_branch_filename(*parent + ".rvl");
    if (!id) throw IntegrityError(where + ": malformed parent '" + *parent + "'");
    rec.parent = *id;
  }
  auto created = take_header(text, "#: created ");
  if (!created) throw IntegrityError(where + ": missing '#: created' header");
  rec.created_at = std::move(*created);
  auto hash = take_header(text, "#: hash ");
  if (!hash) throw IntegrityError(where + ": missing '#: hash' header");
  rec.content_hash = std::move(*hash);

  const std::string actual = hex64(fnv1a64(text));
  if (actual != rec.content_hash)
    throw IntegrityError(where + ": content hash mismatch (recorded " + rec.content_hash + ", actual " + actual +
                         ")");
  return {std::move(rec), std::string(text)};
}

std::optional<BranchId> parse_branch_filename(std::string_view filename) {
  constexpr std::string_view kExt = ".rvl";
  if (filename.size() <= kExt.size() || filename.substr(filename.size() - kExt.size()) != kExt)
    return std::nullopt;
  const std::string_view stem = filename.substr(0, filename.size() - kExt.size());
  const std::size_t dot = stem.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return std::nullopt;
  const auto number = parse_number(stem.substr(dot + 1));
  if (!number) return std::nullopt;
  return BranchId{std::string(stem.substr(0, dot)), *number};
}

BranchStore::BranchStore(fs::path root, Clock clock) : root_(std::move(root)), clock_(std::move(clock)) {}

fs::path BranchStore::path_for(const BranchId& id) const { return root_ / (id.str() + ".rvl"); }

std::vector<long> BranchStore::existing_numbers(const std::string& base) const {
  std::vector<long> out;
  std::error_code ec;
  if (!fs::exists(root_, ec)) return out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    const auto id = parse_branch_filename(entry.path().filename().string());
    if (id && id->base == base) out.push_back(id->number);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BranchRecord BranchStore::write_locked(const dsl::Script& script, const std::string& base,
                                       const std::string& description, const std::optional<BranchId>& parent,
                                       std::optional<long> fixed_number) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StoreError("cannot create store directory '" + root_.string() + "': " + ec.message());
  LockFile lock(root_ / ("." + base + ".lock"));

  if (parent && !fs::exists(path_for(*parent)))
    throw StoreError("parent branch " + parent->str() + " does not exist");

  const std::string body = dsl::format_script(script);
  BranchRecord rec;
  rec.base = base;
  rec.description = description;
  rec.parent = parent;
  rec.created_at = iso8601_utc(clock_());
  rec.content_hash = hex64(fnv1a64(body));

  if (fixed_number) {
    rec.number = *fixed_number;
    if (!write_exclusive(path_for(rec.id()), render_branch_file(rec, body)))
      throw StoreError(rec.id().str() + " already exists");
    return rec;
  }

  const auto numbers = existing_numbers(base);
  rec.number = numbers.empty() ? 1 : std::max(1L, numbers.back() + 1);
  // Writers that bypass the lock can still race us; move on to the next number.
  while (!write_exclusive(path_for(rec.id()), render_branch_file(rec, body))) ++rec.number;
  return rec;
}

BranchRecord BranchStore::ensure_original(const dsl::Script& script, const std::string& base) {
  validate_base(base);
  const BranchId id{base, 0};
  if (fs::exists(path_for(id))) return load_branch(base, 0).second;
  try {
    return write_locked(script, base, "original", std::nullopt, 0);
  } catch (const StoreError&) {
    if (fs::exists(path_for(id))) return load_branch(base, 0).second;
    throw;
  }
}

BranchRecord BranchStore::save_branch(const dsl::Script& script, const std::string& base,
                                      const std::string& description, const std::optional<BranchId>& parent) {
  validate_base(base);
  if (description.empty()) throw StoreError("branch description must not be empty");
  if (description.find('\n') != std::string::npos || description.find('\r') != std::string::npos)
    throw StoreError("branch description must be a single line");
  return write_locked(script, base, description, parent, std::nullopt);
}

std::pair<dsl::Script, BranchRecord> BranchStore::load_branch(const std::string& base, long number) const {
  const BranchId id{base, number};
  const fs::path path = path_for(id);
  if (!fs::exists(path)) throw StoreError("branch " + id.str() + " not found in '" + root_.string() + "'");
  auto [rec, body] = parse_branch_file(read_file(path), base, number);
  dsl::Script script = dsl::parse_script(body, path.filename().string());
  return {std::move(script), std::move(rec)};
}

std::vector<BranchRecord> BranchStore::list_branches(const std::string& base) const {
  std::vector<BranchRecord> out;
  for (long n : existing_numbers(base)) out.push_back(load_branch(base, n).second);
  return out;
}

std::vector<DiffEntry> BranchStore::diff_branches(const BranchId& a, const BranchId& b) const {
  auto lines_of = [&](const BranchId& id) {
    std::vector<std::string> lines;
    for (const dsl::Stmt& st : load_branch(id.base, id.number).first.lines) lines.push_back(dsl::format_stmt(st));
    return lines;
  };
  return diff_lines(lines_of(a), lines_of(b));
}

}  // namespace rv::store
