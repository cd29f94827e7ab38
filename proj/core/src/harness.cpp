#include "tdt/harness.hpp"

#include <fcntl.h>
#include <fnmatch.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <set>
#include <thread>

#include "json.hpp"
#include "tdt/error.hpp"

extern char** environ;

namespace tdt {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

bool is_executable(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

// Absolute path of the executable named by `word`, or empty if unresolvable.
fs::path resolve_executable(const std::string& word, const fs::path& base) {
  if (word.find('/') != std::string::npos) {
    fs::path p(word);
    if (p.is_relative()) p = base / p;
    return is_executable(p) ? fs::absolute(p) : fs::path{};
  }
  const char* path_env = std::getenv("PATH");
  std::string_view dirs = path_env != nullptr ? path_env : "/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= dirs.size()) {
    std::size_t colon = dirs.find(':', start);
    if (colon == std::string_view::npos) colon = dirs.size();
    const std::string_view dir = dirs.substr(start, colon - start);
    const fs::path candidate = fs::path(dir.empty() ? "." : std::string(dir)) / word;
    if (is_executable(candidate)) return fs::absolute(candidate);
    start = colon + 1;
  }
  return {};
}

struct Prepared {
  fs::path executable;
  std::vector<std::string> words;  // with {config_dir} expanded, {input} intact
};

Prepared prepare(const ParserSpec& spec, const fs::path& config_dir) {
  std::string command = spec.command;
  replace_all(command, "{config_dir}", fs::absolute(config_dir).lexically_normal().string());
  Prepared p;
  p.words = split_command(command);
  if (p.words.empty()) throw ConfigError("parser '" + spec.name + "': empty command");
  p.executable = resolve_executable(p.words[0], config_dir);
  if (p.executable.empty()) {
    throw ConfigError("parser '" + spec.name + "': cannot resolve command '" +
                      p.words[0] + "'");
  }
  return p;
}

struct ProcessResult {
  int exit_status = -1;
  int signal = 0;
  bool timed_out = false;
  std::string stderr_text;
  std::uint64_t stderr_bytes = 0;
  double wall_secs = 0.0;
  std::string error;
};

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "tdt-job-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw Error(std::string("mkdtemp failed: ") + std::strerror(errno));
    }
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

class SpawnSetup {
 public:
  SpawnSetup() {
    ::posix_spawn_file_actions_init(&actions);
    ::posix_spawnattr_init(&attr);
  }
  ~SpawnSetup() {
    ::posix_spawn_file_actions_destroy(&actions);
    ::posix_spawnattr_destroy(&attr);
  }
  SpawnSetup(const SpawnSetup&) = delete;
  SpawnSetup& operator=(const SpawnSetup&) = delete;

  posix_spawn_file_actions_t actions;
  posix_spawnattr_t attr;
};

ProcessResult run_process(const fs::path& executable, const std::vector<std::string>& argv,
                          const fs::path& cwd, double timeout_secs, std::size_t cap) {
  ProcessResult out;
  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_secs));

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    out.error = std::string("pipe: ") + std::strerror(errno);
    return out;
  }
  SpawnSetup setup;
  ::posix_spawn_file_actions_addopen(&setup.actions, 0, "/dev/null", O_RDONLY, 0);
  ::posix_spawn_file_actions_addopen(&setup.actions, 1, "/dev/null", O_WRONLY, 0);
  ::posix_spawn_file_actions_adddup2(&setup.actions, fds[1], 2);
  ::posix_spawn_file_actions_addchdir_np(&setup.actions, cwd.c_str());
  sigset_t none, defaults;
  sigemptyset(&none);
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  ::posix_spawnattr_setsigmask(&setup.attr, &none);
  ::posix_spawnattr_setsigdefault(&setup.attr, &defaults);
  ::posix_spawnattr_setpgroup(&setup.attr, 0);
  ::posix_spawnattr_setflags(&setup.attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK |
                                              POSIX_SPAWN_SETSIGDEF);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, executable.c_str(), &setup.actions, &setup.attr,
                               args.data(), environ);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    out.error = std::string("spawn: ") + std::strerror(rc);
    return out;
  }

  char buffer[8192];
  bool open = true;
  bool exited = false;
  auto drain = [&](bool block_once) {
    while (open) {
      const ssize_t got = ::read(fds[0], buffer, sizeof buffer);
      if (got > 0) {
        out.stderr_bytes += static_cast<std::uint64_t>(got);
        if (out.stderr_text.size() < cap) {
          out.stderr_text.append(buffer, std::min<std::size_t>(static_cast<std::size_t>(got),
                                                               cap - out.stderr_text.size()));
        }
        if (block_once) return;
      } else if (got == 0) {
        open = false;
      } else if (errno == EINTR) {
        continue;
      } else {
        return;  // EAGAIN on a non-blocking drain
      }
    }
  };

  while (true) {
    const auto now = Clock::now();
    if (now >= deadline) {
      out.timed_out = true;
      break;
    }
    if (open) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
      pollfd p{fds[0], POLLIN, 0};
      const int ready = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count() + 1, 20)));
      if (ready > 0) drain(true);
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    siginfo_t info{};
    if (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT) == 0 &&
        info.si_pid == pid) {
      exited = true;
      break;
    }
  }
  // Tear down the whole process group (lingering children included), then
  // reap the leader.
  ::kill(-pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (open) {
    ::fcntl(fds[0], F_SETFL, ::fcntl(fds[0], F_GETFL) | O_NONBLOCK);
    drain(false);
  }
  ::close(fds[0]);
  out.wall_secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (exited && WIFEXITED(status)) {
    out.exit_status = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status) && !out.timed_out) {
    out.signal = WTERMSIG(status);
  } else if (out.timed_out) {
    out.signal = SIGKILL;
  }
  return out;
}

bool decide(AcceptPolicy policy, const ProcessResult& r) {
  if (!r.error.empty() || r.timed_out || r.signal != 0 || r.exit_status < 0) return false;
  const bool quiet = r.stderr_bytes == 0;
  const bool zero = r.exit_status == 0;
  switch (policy) {
    case AcceptPolicy::stderr_empty:
      return quiet;
    case AcceptPolicy::exit_zero:
      return zero;
    case AcceptPolicy::both:
      return quiet && zero;
  }
  return false;
}

}  // namespace

AcceptPolicy parse_policy(std::string_view text) {
  if (text == "stderr-empty") return AcceptPolicy::stderr_empty;
  if (text == "exit-zero") return AcceptPolicy::exit_zero;
  if (text == "both") return AcceptPolicy::both;
  throw ConfigError("unknown accept policy '" + std::string(text) +
                    "' (expected stderr-empty, exit-zero or both)");
}

std::string_view policy_name(AcceptPolicy p) {
  switch (p) {
    case AcceptPolicy::stderr_empty:
      return "stderr-empty";
    case AcceptPolicy::exit_zero:
      return "exit-zero";
    case AcceptPolicy::both:
      return "both";
  }
  return "stderr-empty";
}

std::vector<std::string> split_command(std::string_view command) {
  std::vector<std::string> words;
  std::string word;
  bool in_word = false;
  char quote = 0;
  for (std::size_t i = 0; i < command.size(); ++i) {
    const char c = command[i];
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < command.size()) {
        word += command[++i];
      } else {
        word += c;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == '\\' && i + 1 < command.size()) {
      word += command[++i];
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) words.push_back(std::move(word));
      word.clear();
      in_word = false;
    } else {
      word += c;
      in_word = true;
    }
  }
  if (quote != 0) throw ConfigError("unterminated quote in command '" + std::string(command) + "'");
  if (in_word) words.push_back(std::move(word));
  return words;
}

RunConfig parse_run_config(std::string_view text, const fs::path& config_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("run config: top level must be an object");
  static const std::set<std::string> top_keys{"parsers",     "corpus",      "glob",
                                              "timeout_secs", "parallelism", "stderr_cap_bytes"};
  static const std::set<std::string> parser_keys{"name", "command", "policy", "keywords"};
  for (const auto& [key, _] : doc.items()) {
    if (top_keys.count(key) == 0) throw ConfigError("run config: unknown key '" + key + "'");
  }
  RunConfig cfg;
  cfg.config_dir = config_dir;
  try {
    if (!doc.contains("parsers") || !doc["parsers"].is_array()) {
      throw ConfigError("run config: 'parsers' must be an array");
    }
    for (const auto& p : doc["parsers"]) {
      if (!p.is_object()) throw ConfigError("run config: parser entries must be objects");
      for (const auto& [key, _] : p.items()) {
        if (parser_keys.count(key) == 0) {
          throw ConfigError("run config: unknown parser key '" + key + "'");
        }
      }
      ParserSpec spec;
      spec.name = p.at("name").get<std::string>();
      spec.command = p.at("command").get<std::string>();
      if (p.contains("policy")) spec.policy = parse_policy(p["policy"].get<std::string>());
      if (p.contains("keywords")) spec.keywords = p["keywords"].get<std::vector<std::string>>();
      cfg.parsers.push_back(std::move(spec));
    }
    if (!doc.contains("corpus")) throw ConfigError("run config: missing 'corpus'");
    cfg.corpus = doc["corpus"].get<std::string>();
    if (cfg.corpus.is_relative()) cfg.corpus = config_dir / cfg.corpus;
    if (doc.contains("glob")) cfg.glob = doc["glob"].get<std::string>();
    if (doc.contains("timeout_secs")) cfg.timeout_secs = doc["timeout_secs"].get<double>();
    if (doc.contains("parallelism")) {
      const auto v = doc["parallelism"].get<std::int64_t>();
      if (v < 1) throw ConfigError("run config: parallelism must be >= 1");
      cfg.parallelism = static_cast<std::size_t>(v);
    }
    if (doc.contains("stderr_cap_bytes")) {
      const auto v = doc["stderr_cap_bytes"].get<std::int64_t>();
      if (v < 0) throw ConfigError("run config: stderr_cap_bytes must be >= 0");
      cfg.stderr_cap_bytes = static_cast<std::size_t>(v);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  fs::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  return parse_run_config(text, dir);
}

std::vector<std::string> list_corpus(const RunConfig& cfg) {
  std::error_code ec;
  if (!fs::is_directory(cfg.corpus, ec)) {
    throw ConfigError("corpus directory '" + cfg.corpus.string() + "' does not exist");
  }
  std::vector<std::string> files;
  for (fs::recursive_directory_iterator it(cfg.corpus, ec), end; it != end; it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file(ec)) continue;
    const std::string name = it->path().filename().string();
    if (::fnmatch(cfg.glob.c_str(), name.c_str(), 0) != 0) continue;
    files.push_back(fs::relative(it->path(), cfg.corpus).generic_string());
  }
  if (ec) throw ConfigError("cannot list corpus: " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.parsers.empty()) throw ConfigError("run config: no parsers");
  std::set<std::string> names;
  for (const auto& p : cfg.parsers) {
    if (p.name.empty()) throw ConfigError("run config: parser with empty name");
    if (!names.insert(p.name).second) {
      throw ConfigError("run config: duplicate parser name '" + p.name + "'");
    }
    if (p.command.find("{input}") == std::string::npos) {
      throw ConfigError("parser '" + p.name + "': command lacks the {input} placeholder");
    }
    prepare(p, cfg.config_dir);
  }
  if (!(cfg.timeout_secs > 0)) throw ConfigError("run config: timeout_secs must be > 0");
  if (cfg.parallelism < 1) throw ConfigError("run config: parallelism must be >= 1");
  if (list_corpus(cfg).empty()) throw ConfigError("corpus contains no matching files");
}

RunOutput run_corpus(const RunConfig& cfg) {
  validate_config(cfg);
  const auto files = list_corpus(cfg);
  std::vector<Prepared> prepared;
  for (const auto& p : cfg.parsers) prepared.push_back(prepare(p, cfg.config_dir));
  const fs::path corpus = fs::absolute(cfg.corpus).lexically_normal();

  RunStore store;
  for (const auto& p : cfg.parsers) store.parsers.push_back(p.name);
  store.inputs = files;
  const std::size_t jobs = cfg.parsers.size() * files.size();
  store.records.resize(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t p = job / files.size();
      const std::size_t i = job % files.size();
      RunRecord& rec = store.records[job];
      rec.parser = p;
      rec.input = i;
      std::vector<std::string> argv = prepared[p].words;
      const std::string input_path = (corpus / files[i]).string();
      for (auto& w : argv) replace_all(w, "{input}", input_path);
      ProcessResult result;
      try {
        TempDir cwd;
        result = run_process(prepared[p].executable, argv, cwd.path(), cfg.timeout_secs,
                             cfg.stderr_cap_bytes);
      } catch (const std::exception& e) {
        result.error = e.what();
      }
      rec.accepted = decide(cfg.parsers[p].policy, result);
      rec.exit_status = result.exit_status;
      rec.signal = result.signal;
      rec.timed_out = result.timed_out;
      rec.stderr_bytes = result.stderr_bytes;
      rec.stderr_truncated = result.stderr_bytes > result.stderr_text.size();
      rec.stderr_text = std::move(result.stderr_text);
      rec.wall_secs = result.wall_secs;
      rec.diagnostic = std::move(result.error);
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t width = std::max<std::size_t>(1, std::min(cfg.parallelism, jobs));
    for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
  }

  std::size_t failures = 0;
  for (const auto& rec : store.records) {
    if (!rec.diagnostic.empty()) ++failures;
  }
  Relation relation = relation_from_store(store);
  return {std::move(relation), std::move(store), failures};
}

Relation relation_from_store(const RunStore& store) {
  std::vector<std::uint8_t> cells(store.parsers.size() * store.inputs.size(), 0);
  for (const auto& rec : store.records) {
    cells.at(rec.parser * store.inputs.size() + rec.input) = rec.accepted ? 1 : 0;
  }
  return Relation(store.parsers, store.inputs, std::move(cells));
}

std::string store_to_jsonl(const RunStore& store) {
  std::string out;
  for (const auto& rec : store.records) {
    json line{{"parser", store.parsers.at(rec.parser)},
              {"input", store.inputs.at(rec.input)},
              {"accept", rec.accepted},
              {"exit_status", rec.exit_status},
              {"signal", rec.signal},
              {"timed_out", rec.timed_out},
              {"stderr", rec.stderr_text},
              {"stderr_bytes", rec.stderr_bytes},
              {"stderr_truncated", rec.stderr_truncated},
              {"wall_secs", rec.wall_secs},
              {"diagnostic", rec.diagnostic}};
    out += line.dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

RunStore parse_store_jsonl(std::string_view text) {
  RunStore store;
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<RunRecord> raw;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      RunRecord rec;
      rec.accepted = j.at("accept").get<bool>();
      rec.exit_status = j.value("exit_status", -1);
      rec.signal = j.value("signal", 0);
      rec.timed_out = j.value("timed_out", false);
      rec.stderr_text = j.value("stderr", std::string{});
      rec.stderr_bytes = j.value("stderr_bytes", std::uint64_t{rec.stderr_text.size()});
      rec.stderr_truncated = j.value("stderr_truncated", false);
      rec.wall_secs = j.value("wall_secs", 0.0);
      rec.diagnostic = j.value("diagnostic", std::string{});
      keys.emplace_back(j.at("parser").get<std::string>(), j.at("input").get<std::string>());
      raw.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw FormatError("result store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<std::string> inputs;
  for (const auto& [parser, input] : keys) {
    if (std::find(store.parsers.begin(), store.parsers.end(), parser) == store.parsers.end()) {
      store.parsers.push_back(parser);
    }
    inputs.push_back(input);
  }
  std::sort(inputs.begin(), inputs.end());
  inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
  store.inputs = inputs;
  const std::size_t n = store.inputs.size();
  store.records.assign(store.parsers.size() * n, RunRecord{});
  std::vector<bool> filled(store.records.size(), false);
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const std::size_t p = static_cast<std::size_t>(
        std::find(store.parsers.begin(), store.parsers.end(), keys[r].first) -
        store.parsers.begin());
    const std::size_t i = static_cast<std::size_t>(
        std::lower_bound(store.inputs.begin(), store.inputs.end(), keys[r].second) -
        store.inputs.begin());
    if (filled[p * n + i]) {
      throw ValidationError("result store repeats (" + keys[r].first + ", " + keys[r].second + ")");
    }
    filled[p * n + i] = true;
    raw[r].parser = p;
    raw[r].input = i;
    store.records[p * n + i] = std::move(raw[r]);
  }
  if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
    throw ValidationError("result store does not cover every (parser, input) pair");
  }
  return store;
}

KeywordTable keyword_table(const RunStore& store,
                           const std::vector<std::vector<std::string>>& keywords) {
  if (keywords.size() != store.parsers.size()) {
    throw ArgumentError("keyword_table: one keyword list per parser required");
  }
  const bool any = std::any_of(keywords.begin(), keywords.end(),
                               [](const auto& k) { return !k.empty(); });
  if (!any) throw ArgumentError("keyword_table: no parser has keywords");
  KeywordTable t;
  t.inputs = store.inputs;
  for (std::size_t p = 0; p < keywords.size(); ++p) {
    for (const auto& k : keywords[p]) t.columns.emplace_back(store.parsers[p], k);
  }
  t.cells.assign(store.inputs.size(), std::vector<bool>(t.columns.size(), false));
  for (std::size_t i = 0; i < store.inputs.size(); ++i) {
    std::size_t col = 0;
    for (std::size_t p = 0; p < keywords.size(); ++p) {
      const RunRecord& rec = store.record(p, i);
      bool matched = false;
      for (const auto& k : keywords[p]) {
        const bool hit = rec.stderr_text.find(k) != std::string::npos;
        t.cells[i][col++] = hit;
        matched = matched || hit;
      }
      if (!keywords[p].empty() && !rec.accepted && !matched) {
        t.uncovered.emplace_back(store.parsers[p], store.inputs[i]);
      }
    }
  }
  return t;
}

std::string keyword_table_to_csv(const KeywordTable& table) {
  std::string out = "input";
  for (const auto& [parser, keyword] : table.columns) out += "," + parser + ":" + keyword;
  out += '\n';
  for (std::size_t i = 0; i < table.inputs.size(); ++i) {
    out += table.inputs[i];
    for (bool cell : table.cells[i]) out += cell ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

}  // namespace tdt
