// rv: command-line front end. Sessions persist between invocations in
// <root>/.rv/session.json, where root is --root, $RV_ROOT, or the current
// directory. The environment is rebuilt on each call by replaying the lines
// already executed.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rv/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rv;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNoSession = 2;

struct NoSession : std::runtime_error {
  NoSession() : std::runtime_error("no session") {}
};

struct CliSession {
  engine::SessionState state;
  std::string base;
  store::BranchId branch;
};

fs::path session_file(const fs::path& root) { return root / ".rv" / "session.json"; }

void save_session(const fs::path& root, const CliSession& s) {
  json log = json::array();
  for (const auto& e : s.state.output_log) log.push_back(service::to_json(e));
  const json j{{"script_text", dsl::format_script(s.state.script)},
               {"source_name", s.state.script.source_name},
               {"base", s.base},
               {"branch", s.branch.number},
               {"data_dir", fs::absolute(s.state.data_dir).lexically_normal().string()},
               {"next_line", s.state.next_line},
               {"output_log", log}};
  fs::create_directories(session_file(root).parent_path());
  const fs::path tmp = session_file(root).string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw StoreError("cannot write session file '" + tmp.string() + "'");
  }
  fs::rename(tmp, session_file(root));
}

CliSession restore_session(const fs::path& root) {
  std::ifstream in(session_file(root), std::ios::binary);
  if (!in) throw NoSession();
  json j;
  in >> j;
  CliSession s;
  s.base = j.at("base").get<std::string>();
  s.branch = store::BranchId{s.base, j.at("branch").get<long>()};
  dsl::Script script = dsl::parse_script(j.at("script_text").get<std::string>(), j.at("source_name").get<std::string>());
  s.state = engine::new_session(std::move(script), j.at("data_dir").get<std::string>());
  const auto next_line = j.at("next_line").get<std::size_t>();
  if (next_line > 1) s.state = engine::run_to_line(s.state, next_line - 1);

  std::vector<engine::OutputEntry> recorded;
  for (const auto& e : j.at("output_log")) recorded.push_back({e.at("line").get<std::size_t>(), e.at("text").get<std::string>()});
  if (recorded != s.state.output_log)
    std::cerr << "rv: warning: replayed output differs from the recorded log (input data changed?)\n";
  return s;
}

fs::path default_root() {
  if (const char* env = std::getenv("RV_ROOT"); env != nullptr && *env != '\0') return env;
  return fs::current_path();
}

void print_script(const engine::SessionState& s) {
  const std::size_t width = std::to_string(std::max<std::size_t>(1, s.script.size())).size();
  for (const auto& st : s.script.lines) {
    std::string num = std::to_string(st.line_no);
    num.insert(0, width - num.size(), ' ');
    std::cout << (st.line_no == s.next_line ? "> " : "  ") << num << "  " << dsl::format_stmt(st) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rv: replay, branch and audit RVL analysis scripts"};
  app.require_subcommand(1);
  std::string root_opt;
  app.add_option("--root", root_opt, "store directory (default: $RV_ROOT or the current directory)");

  std::string load_path;
  auto* load = app.add_subcommand("load", "start a session from a .rvl script or branch file");
  load->add_option("file", load_path, "script file")->required();

  std::size_t from_line = 0;
  std::size_t through_line = 0;
  bool audit_flag = false;
  auto* run = app.add_subcommand("run", "run the loaded session (continues from the next line)");
  run->add_option("--from", from_line, "start at this line (rolls back to a fresh replay of earlier lines)");
  run->add_option("--through", through_line, "stop after this line");
  run->add_flag("--audit", audit_flag, "print statistical audit warnings after a complete run");

  std::size_t edit_no = 0;
  std::string edit_text;
  auto* edit = app.add_subcommand("edit", "replace line N (or append at N = length + 1)");
  edit->add_option("line", edit_no, "line number")->required();
  edit->add_option("text", edit_text, "new statement text")->required();

  auto* reset_cmd = app.add_subcommand("reset", "clear outputs and start again at line 1");
  auto* show = app.add_subcommand("show", "print the script with line numbers");
  auto* log_cmd = app.add_subcommand("log", "print the full output log");

  auto* branch = app.add_subcommand("branch", "save, list and compare script versions");
  branch->require_subcommand(1);
  std::string description;
  long parent_number = -1;
  auto* bsave = branch->add_subcommand("save", "save the session script as <base>.<n>.rvl");
  bsave->add_option("description", description, "one-line description")->required();
  bsave->add_option("--parent", parent_number, "parent branch number (default: the branch the session came from)");
  std::string list_base;
  auto* blist = branch->add_subcommand("list", "list saved versions");
  blist->add_option("--base", list_base, "script base name (default: the session's)");
  std::string diff_a, diff_b;
  auto* bdiff = branch->add_subcommand("diff", "line diff between two versions, e.g. pima.0 pima.1");
  bdiff->add_option("a", diff_a)->required();
  bdiff->add_option("b", diff_b)->required();

  int port = service::kDefaultPort;
  std::string serve_root;
  std::string static_dir;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "start the HTTP/JSON service");
  serve->add_option("--port", port, "listen port")->capture_default_str();
  serve->add_option("--root", serve_root, "store directory");
  serve->add_option("--host", host, "listen address")->capture_default_str();
  serve->add_option("--static", static_dir, "directory of web UI assets to serve at /");

  CLI11_PARSE(app, argc, argv);

  const fs::path root = root_opt.empty() ? default_root() : fs::path(root_opt);

  try {
    if (*load) {
      store::BranchStore store(root);
      const auto loaded = service::load_script_file(store, fs::absolute(load_path));
      CliSession s{engine::new_session(loaded.script, loaded.data_dir), loaded.base, loaded.branch};
      save_session(root, s);
      std::cout << "loaded " << loaded.branch.str() << " (" << s.state.script.size() << " lines)\n";
    } else if (*run) {
      CliSession s = restore_session(root);
      service::RunRequest req;
      if (from_line > 0) req.from = from_line;
      if (through_line > 0) req.through = through_line;
      req.audit = audit_flag;
      const auto out = service::run_session(s.state, req);
      s.state = out.state;
      save_session(root, s);
      std::cout << out.rendered;
    } else if (*edit) {
      CliSession s = restore_session(root);
      s.state = engine::edit_line(s.state, edit_no, edit_text);
      save_session(root, s);
      std::cout << edit_no << "  " << dsl::format_stmt(s.state.script.line(edit_no)) << '\n';
    } else if (*reset_cmd) {
      CliSession s = restore_session(root);
      s.state = engine::reset(s.state);
      save_session(root, s);
    } else if (*show) {
      print_script(restore_session(root).state);
    } else if (*log_cmd) {
      std::cout << engine::render_log(restore_session(root).state.output_log);
    } else if (*bsave) {
      CliSession s = restore_session(root);
      store::BranchStore store(root);
      std::optional<store::BranchId> parent = s.branch;
      if (parent_number >= 0) parent = store::BranchId{s.base, parent_number};
      const auto rec = store.save_branch(s.state.script, s.base, description, parent);
      s.branch = rec.id();
      save_session(root, s);
      std::cout << "saved " << rec.id().str() << " (" << store.path_for(rec.id()).string() << ")\n";
    } else if (*blist) {
      std::string base = list_base;
      if (base.empty()) base = restore_session(root).base;
      store::BranchStore store(root);
      for (const auto& r : store.list_branches(base)) {
        std::cout << r.id().str() << "  parent=" << (r.parent ? r.parent->str() : "-") << "  " << r.created_at
                  << "  " << r.content_hash << "  " << r.description << '\n';
      }
    } else if (*bdiff) {
      const auto a = store::parse_branch_filename(diff_a + ".rvl");
      const auto b = store::parse_branch_filename(diff_b + ".rvl");
      if (!a || !b) throw StoreError("branches are named <base>.<n>");
      store::BranchStore store(root);
      for (const auto& d : store.diff_branches(*a, *b)) {
        if (d.left) std::cout << "-" << d.left_line << ": " << *d.left << '\n';
        if (d.right) std::cout << "+" << d.right_line << ": " << *d.right << '\n';
      }
    } else if (*serve) {
      const fs::path dir = serve_root.empty() ? root : fs::path(serve_root);
      service::HttpServer server(dir, static_dir);
      std::cerr << "rv: serving " << dir.string() << " on http://" << host << ":" << port << '\n';
      if (!server.listen(host, port)) {
        std::cerr << "rv: cannot listen on " << host << ":" << port << '\n';
        return kExitError;
      }
    }
  } catch (const NoSession&) {
    std::cerr << "rv: no session (run `rv load <file.rvl>` first)\n";
    return kExitNoSession;
  } catch (const std::exception& e) {
    std::cerr << "rv: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
