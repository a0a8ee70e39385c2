#include "rv/service.hpp"

#include <fstream>
#include <sstream>

namespace rv::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string stem_of(const fs::path& path) {
  std::string name = path.filename().string();
  if (name.size() > 4 && name.substr(name.size() - 4) == ".rvl") name.resize(name.size() - 4);
  return name;
}

}  // namespace

LoadedScript load_script_file(store::BranchStore& store, const fs::path& path) {
  const std::string text = read_text(path);
  fs::path data_dir = path.parent_path();
  if (data_dir.empty()) data_dir = ".";

  if (text.rfind("#: desc ", 0) == 0) {
    const auto id = store::parse_branch_filename(path.filename().string());
    if (!id) throw StoreError("'" + path.string() + "' has a branch header but is not named <base>.<n>.rvl");
    auto [rec, body] = store::parse_branch_file(text, id->base, id->number);
    LoadedScript out{dsl::parse_script(body, path.filename().string()), id->base, *id, data_dir};
    return out;
  }

  LoadedScript out;
  out.script = dsl::parse_script(text, path.filename().string());
  out.base = stem_of(path);
  out.branch = store.ensure_original(out.script, out.base).id();
  out.data_dir = data_dir;
  return out;
}

LoadedScript load_script_text(store::BranchStore& store, std::string_view text, const std::string& base,
                              const fs::path& data_dir) {
  LoadedScript out;
  out.script = dsl::parse_script(text, base + ".rvl");
  out.base = base;
  out.branch = store.ensure_original(out.script, base).id();
  out.data_dir = data_dir;
  return out;
}

RunOutcome run_session(const engine::SessionState& s, const RunRequest& req, const audit::AuditConfig& config) {
  RunOutcome out;
  const std::size_t end = s.script.size();
  std::size_t log_mark = 0;
  if (req.from) {
    const std::size_t from = *req.from;
    if (from < 1 || from > s.next_line)
      throw RunError(0, "starting line " + std::to_string(from) + " must be between 1 and the next line (" +
                            std::to_string(s.next_line) + ")");
    engine::SessionState base = s;
    if (from < s.next_line) {
      base = engine::reset(s);
      if (from > 1) base = engine::run_to_line(base, from - 1);
    }
    log_mark = base.output_log.size();
    out.state = engine::run_to_line(base, req.through.value_or(end));
  } else {
    log_mark = s.output_log.size();
    out.state = req.through ? engine::run_to_line(s, *req.through) : engine::continue_run(s);
  }
  out.outputs = engine::outputs_since(out.state, log_mark);
  if (req.audit && out.state.at_end()) out.advisories = audit::audit_session(out.state, config);
  out.rendered = engine::render_log(out.outputs) + audit::render_advisories(out.advisories);
  return out;
}

json to_json(const engine::OutputEntry& e) { return json{{"line", e.line}, {"text", e.text}}; }

json to_json(const audit::Advisory& a) {
  return json{{"code", std::string(audit::to_string(a.code))},
              {"message", a.message},
              {"line", a.line},
              {"subject", a.subject},
              {"text", audit::render_advisory(a)}};
}

json to_json(const store::BranchRecord& r) {
  return json{{"base", r.base},
              {"number", r.number},
              {"name", r.id().str()},
              {"description", r.description},
              {"parent", r.parent ? json(r.parent->str()) : json(nullptr)},
              {"created_at", r.created_at},
              {"content_hash", r.content_hash}};
}

json lines_json(const dsl::Script& s) {
  json lines = json::array();
  for (const dsl::Stmt& st : s.lines) lines.push_back(dsl::format_stmt(st));
  return lines;
}

SessionManager::SessionManager(fs::path root) : root_(root), store_(std::move(root)) {}

std::shared_ptr<SessionHandle> SessionManager::create(LoadedScript loaded) {
  auto h = std::make_shared<SessionHandle>();
  h->base = loaded.base;
  h->branch = loaded.branch;
  h->state = engine::new_session(std::move(loaded.script), loaded.data_dir);
  std::lock_guard<std::mutex> g(registry_mutex_);
  h->id = "s" + std::to_string(next_id_++);
  sessions_[h->id] = h;
  return h;
}

std::shared_ptr<SessionHandle> SessionManager::get(const std::string& id) const {
  std::lock_guard<std::mutex> g(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("unknown session '" + id + "'");
  return it->second;
}

std::unique_lock<std::mutex> SessionManager::acquire(const std::string& id) {
  auto h = get(id);
  std::unique_lock<std::mutex> lock(h->busy, std::try_to_lock);
  if (!lock.owns_lock()) throw SessionBusy("session '" + id + "' is busy");
  return lock;
}

RunOutcome SessionManager::run(const std::string& id, const RunRequest& req) {
  auto h = get(id);
  auto lock = acquire(id);
  RunOutcome out = run_session(h->state, req);
  h->state = out.state;
  h->last_advisories = out.advisories;
  return out;
}

engine::SessionState SessionManager::edit(const std::string& id, std::size_t line_no, const std::string& text) {
  auto h = get(id);
  auto lock = acquire(id);
  h->state = engine::edit_line(h->state, line_no, text);
  h->last_advisories.clear();
  return h->state;
}

engine::SessionState SessionManager::reset(const std::string& id) {
  auto h = get(id);
  auto lock = acquire(id);
  h->state = engine::reset(h->state);
  h->last_advisories.clear();
  return h->state;
}

store::BranchRecord SessionManager::save_branch(const std::string& id, const std::string& description) {
  auto h = get(id);
  auto lock = acquire(id);
  store::BranchRecord rec = store_.save_branch(h->state.script, h->base, description, h->branch);
  h->branch = rec.id();
  return rec;
}

json SessionManager::describe(const std::string& id) const {
  auto h = get(id);
  std::lock_guard<std::mutex> lock(h->busy);
  json outputs = json::array();
  for (const auto& e : h->state.output_log) outputs.push_back(to_json(e));
  json advisories = json::array();
  for (const auto& a : h->last_advisories) advisories.push_back(to_json(a));
  return json{{"id", h->id},
              {"base", h->base},
              {"branch", h->branch.str()},
              {"lines", lines_json(h->state.script)},
              {"next_line", h->state.next_line},
              {"outputs", outputs},
              {"advisories", advisories},
              {"inference_count", h->state.inference_count},
              {"log", engine::render_log(h->state.output_log)}};
}

}  // namespace rv::service
