#pragma once

// Session facade shared by the `rv` CLI and the HTTP server.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rv/audit.hpp"
#include "rv/branch_store.hpp"
#include "rv/engine.hpp"

namespace rv::service {

inline constexpr int kDefaultPort = 7343;

struct LoadedScript {
  dsl::Script script;
  std::string base;
  store::BranchId branch;  // what a branch save will name as parent
  std::filesystem::path data_dir;
};

// Plain `.rvl` files register as `<base>.0` in the store; branch files
// (`<base>.<n>.rvl` with a header) are hash-verified and keep their number.
LoadedScript load_script_file(store::BranchStore& store, const std::filesystem::path& path);
LoadedScript load_script_text(store::BranchStore& store, std::string_view text, const std::string& base,
                              const std::filesystem::path& data_dir);

struct RunRequest {
  std::optional<std::size_t> from;
  std::optional<std::size_t> through;
  bool audit = false;
};

struct RunOutcome {
  engine::SessionState state;
  std::vector<engine::OutputEntry> outputs;  // produced by this run only
  std::vector<audit::Advisory> advisories;   // only when audit requested and the run reached the end
  std::string rendered;                      // what the CLI prints
};

RunOutcome run_session(const engine::SessionState& s, const RunRequest& req,
                       const audit::AuditConfig& config = {});

nlohmann::json to_json(const engine::OutputEntry& e);
nlohmann::json to_json(const audit::Advisory& a);
nlohmann::json to_json(const store::BranchRecord& r);
nlohmann::json lines_json(const dsl::Script& s);

struct SessionHandle {
  std::string id;
  std::string base;
  store::BranchId branch;
  engine::SessionState state;
  std::vector<audit::Advisory> last_advisories;
  std::mutex busy;
};

class SessionBusy : public Error {
 public:
  using Error::Error;
};

class SessionNotFound : public Error {
 public:
  using Error::Error;
};

// In-memory session registry. Every mutating call holds the session's
// exclusive lock; a second caller gets SessionBusy instead of waiting.
class SessionManager {
 public:
  explicit SessionManager(std::filesystem::path root);

  store::BranchStore& store() noexcept { return store_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  std::shared_ptr<SessionHandle> create(LoadedScript loaded);
  std::shared_ptr<SessionHandle> get(const std::string& id) const;

  RunOutcome run(const std::string& id, const RunRequest& req);
  engine::SessionState edit(const std::string& id, std::size_t line_no, const std::string& text);
  engine::SessionState reset(const std::string& id);
  store::BranchRecord save_branch(const std::string& id, const std::string& description);

  nlohmann::json describe(const std::string& id) const;

  // Holds the session exclusively; other operations on it fail with
  // SessionBusy until the lock is released.
  std::unique_lock<std::mutex> acquire(const std::string& id);

 private:
  std::filesystem::path root_;
  store::BranchStore store_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<SessionHandle>> sessions_;
  std::uint64_t next_id_ = 1;
};

class HttpServer {
 public:
  // static_dir, when non-empty, is served at "/".
  explicit HttpServer(std::filesystem::path root, std::filesystem::path static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  SessionManager& sessions();

  // Blocks until stop(). Returns false if the socket could not be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it (or -1); pair with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rv::service
