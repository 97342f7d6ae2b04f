#include "minikind/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace minikind {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// --- config file ------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void cfg_fail(const std::string& path, int line, const std::string& what) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + what);
}

std::string unquote(const std::string& path, int line, const std::string& v) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    cfg_fail(path, line, "expected a quoted string, got '" + v + "'");
  return v.substr(1, v.size() - 2);
}

bool executable_file(const std::string& p) {
  return fs::is_regular_file(fs::status(p)) && access(p.c_str(), X_OK) == 0;
}

// Resolve a command name: absolute as-is, otherwise try the config file's
// directory, the working directory, then $PATH.
std::string resolve_cmd(const std::string& cmd, const fs::path& cfg_dir) {
  fs::path p(cmd);
  if (p.is_absolute()) return executable_file(cmd) ? cmd : "";
  fs::path local = cfg_dir / p;
  if (executable_file(local.string())) return local.string();
  if (cmd.find('/') != std::string::npos && executable_file(cmd)) return fs::absolute(p).string();
  if (cmd.find('/') == std::string::npos) {
    const char* path_env = std::getenv("PATH");
    std::stringstream ss(path_env ? path_env : "");
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      if (dir.empty()) continue;
      fs::path cand = fs::path(dir) / cmd;
      if (executable_file(cand.string())) return cand.string();
    }
  }
  return "";
}

struct RawSection {
  std::string name;
  std::map<std::string, std::string> kv;
  std::map<std::string, int> kv_line;
};

std::vector<RawSection> read_sections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open solver config '" + path + "'");
  std::vector<RawSection> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') cfg_fail(path, lineno, "unterminated section header");
      out.push_back({trim(s.substr(1, s.size() - 2)), {}, {}});
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) cfg_fail(path, lineno, "expected 'key = value'");
    if (out.empty()) cfg_fail(path, lineno, "key outside of any [section]");
    std::string key = trim(s.substr(0, eq));
    out.back().kv[key] = trim(s.substr(eq + 1));
    out.back().kv_line[key] = lineno;
  }
  return out;
}

SolverConfig section_to_config(const std::string& path, const RawSection& sec) {
  SolverConfig cfg;
  cfg.name = sec.name;
  for (const auto& [key, val] : sec.kv) {
    int ln = sec.kv_line.at(key);
    if (key == "cmd") {
      cfg.cmd = unquote(path, ln, val);
    } else if (key == "args") {
      if (val.size() < 2 || val.front() != '[' || val.back() != ']')
        cfg_fail(path, ln, "args must be an array of quoted strings");
      std::string body = trim(val.substr(1, val.size() - 2));
      size_t pos = 0;
      while (pos < body.size()) {
        size_t q1 = body.find('"', pos);
        if (q1 == std::string::npos) break;
        size_t q2 = body.find('"', q1 + 1);
        if (q2 == std::string::npos) cfg_fail(path, ln, "unterminated string in args");
        cfg.args.push_back(body.substr(q1 + 1, q2 - q1 - 1));
        pos = q2 + 1;
      }
    } else if (key == "logic") {
      cfg.logic = unquote(path, ln, val);
    } else if (key == "unsat_cores") {
      if (val != "true" && val != "false") cfg_fail(path, ln, "unsat_cores must be true or false");
      cfg.unsat_cores = val == "true";
    } else if (key == "timeout_ms") {
      try {
        cfg.timeout_ms = std::stoi(val);
      } catch (...) {
        cfg_fail(path, ln, "timeout_ms must be an integer");
      }
      if (cfg.timeout_ms <= 0) cfg_fail(path, ln, "timeout_ms must be positive");
    } else if (key == "soft_timeout_opt") {
      cfg.soft_timeout_opt = unquote(path, ln, val);
    } else {
      cfg_fail(path, ln, "unknown key '" + key + "'");
    }
  }
  if (cfg.cmd.empty()) throw ConfigError(path + ": section [" + sec.name + "] has no cmd");
  return cfg;
}

}  // namespace

SolverConfig load_solver_config(const std::string& path, const std::string& section) {
  auto sections = read_sections(path);
  fs::path dir = fs::absolute(fs::path(path)).parent_path();
  if (!section.empty()) {
    for (const auto& sec : sections) {
      if (sec.name != section) continue;
      SolverConfig cfg = section_to_config(path, sec);
      std::string resolved = resolve_cmd(cfg.cmd, dir);
      if (resolved.empty())
        throw ConfigError("solver '" + section + "': executable '" + cfg.cmd + "' not found");
      cfg.cmd = resolved;
      return cfg;
    }
    throw ConfigError(path + ": no section [" + section + "]");
  }
  // Auto mode: first section whose executable resolves.
  for (const auto& sec : sections) {
    SolverConfig cfg = section_to_config(path, sec);
    std::string resolved = resolve_cmd(cfg.cmd, dir);
    if (resolved.empty()) continue;
    cfg.cmd = resolved;
    return cfg;
  }
  throw ConfigError(path + ": no configured solver executable was found");
}

// --- s-expressions ----------------------------------------------------------

namespace {

struct Sexp {
  bool list = false;
  std::string atom;
  std::vector<Sexp> kids;
};

Sexp parse_sexp(const std::string& text, size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) pos++;
  if (pos >= text.size()) throw ProtocolError("truncated solver response: '" + text + "'");
  Sexp out;
  char c = text[pos];
  if (c == '(') {
    out.list = true;
    pos++;
    for (;;) {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) pos++;
      if (pos >= text.size()) throw ProtocolError("unbalanced solver response: '" + text + "'");
      if (text[pos] == ')') {
        pos++;
        return out;
      }
      out.kids.push_back(parse_sexp(text, pos));
    }
  }
  if (c == '"' || c == '|') {
    char close = c;
    size_t end = pos + 1;
    while (end < text.size() && text[end] != close) {
      if (close == '"' && text[end] == '\\') end++;
      end++;
    }
    if (end >= text.size()) throw ProtocolError("unterminated quote in solver response");
    out.atom = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    return out;
  }
  size_t end = pos;
  while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end])) &&
         text[end] != '(' && text[end] != ')')
    end++;
  out.atom = text.substr(pos, end - pos);
  pos = end;
  return out;
}

Sexp parse_sexp(const std::string& text) {
  size_t pos = 0;
  return parse_sexp(text, pos);
}

mpq_class decimal_to_rational(const std::string& s) {
  size_t dot = s.find('.');
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  mpz_class num(digits, 10);
  mpz_class den = 1;
  for (size_t i = dot + 1; i < s.size(); i++) den *= 10;
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

bool plain_number(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-') ? 1 : 0;
  if (i >= s.size()) return false;
  bool dot_seen = false;
  for (; i < s.size(); i++) {
    if (s[i] == '.' && !dot_seen) {
      dot_seen = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

// Model values as solvers print them: true/false, 7, -7, 3.5, (- 7),
// (/ 1 3), (- (/ 7.0 2.0)). Decimal components are converted exactly.
Value parse_model_value(const Sexp& s) {
  if (!s.list) {
    if (s.atom == "true") return Value(true);
    if (s.atom == "false") return Value(false);
    if (!plain_number(s.atom)) throw ProtocolError("unparseable model value '" + s.atom + "'");
    if (s.atom.find('.') != std::string::npos) return Value(decimal_to_rational(s.atom));
    return Value(mpz_class(s.atom, 10));
  }
  if (s.kids.size() == 2 && !s.kids[0].list && s.kids[0].atom == "-") {
    Value v = parse_model_value(s.kids[1]);
    if (v.sort() == Sort::Int) return Value(mpz_class(-v.as_int()));
    if (v.sort() == Sort::Real) return Value(mpq_class(-v.as_real()));
    throw ProtocolError("negation of a non-numeric model value");
  }
  if (s.kids.size() == 3 && !s.kids[0].list && s.kids[0].atom == "/") {
    auto as_rat = [](const Value& v) {
      return v.sort() == Sort::Int ? mpq_class(v.as_int()) : mpq_class(v.as_real());
    };
    Value a = parse_model_value(s.kids[1]), b = parse_model_value(s.kids[2]);
    mpq_class q = as_rat(a) / as_rat(b);
    q.canonicalize();
    return Value(q);
  }
  throw ProtocolError("unparseable model value");
}

Value coerce_value(const Value& v, Sort want, const std::string& name) {
  if (v.sort() == want) return v;
  if (want == Sort::Real && v.sort() == Sort::Int) return Value(mpq_class(v.as_int()));
  if (want == Sort::Int && v.sort() == Sort::Real && v.as_real().get_den() == 1)
    return Value(v.as_real().get_num());
  throw ProtocolError("model value for '" + name + "' has sort " + sort_name(v.sort()) +
                      ", expected " + sort_name(want));
}

const char* sort_smt(Sort s) {
  switch (s) {
    case Sort::Bool: return "Bool";
    case Sort::Int: return "Int";
    default: return "Real";
  }
}

void ignore_sigpipe_once() {
  static const int done = [] {
    signal(SIGPIPE, SIG_IGN);
    return 0;
  }();
  (void)done;
}

}  // namespace

// --- session ----------------------------------------------------------------

struct Session::Impl {
  SolverConfig cfg;
  std::string logic;
  std::string transcript_path;
  std::ofstream transcript;

  pid_t pid = -1;
  int to_solver = -1;    // we write commands here
  int from_solver = -1;  // we read responses here

  std::vector<std::string> replay;       // state commands at depth 0, for recycle
  std::deque<std::string> pending;       // commands whose ack has not been read yet
  std::string rbuf;                      // buffered solver output
  size_t rpos = 0;

  int depth = 0;
  std::uint64_t epoch = 0;
  long checks = 0;
  bool dead = false;
  bool in_handshake = false;

  // Scope-aware symbol tracking: names and labels vanish when their scope pops.
  std::unordered_map<std::string, Sort> declared_sorts;
  std::vector<std::vector<std::string>> declared_by_depth{1};
  std::unordered_set<std::string> labels;
  std::vector<std::vector<std::string>> labels_by_depth{1};

  ~Impl() { shutdown(); }

  // -- subprocess lifecycle --

  void spawn() {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
      throw SolverSpawnError("pipe: " + std::string(strerror(errno)));
    pid_t p = fork();
    if (p < 0) throw SolverSpawnError("fork: " + std::string(strerror(errno)));
    if (p == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      std::vector<char*> argv;
      argv.push_back(const_cast<char*>(cfg.cmd.c_str()));
      for (const auto& a : cfg.args) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execv(cfg.cmd.c_str(), argv.data());
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    pid = p;
    to_solver = in_pipe[1];
    from_solver = out_pipe[0];
    fcntl(from_solver, F_SETFL, O_NONBLOCK);
    rbuf.clear();
    rpos = 0;
    pending.clear();
    dead = false;
  }

  void kill_solver() {
    if (pid > 0) {
      ::kill(pid, SIGKILL);
      int status = 0;
      waitpid(pid, &status, 0);
      pid = -1;
    }
    if (to_solver >= 0) close(to_solver);
    if (from_solver >= 0) close(from_solver);
    to_solver = from_solver = -1;
  }

  void shutdown() {
    if (pid <= 0) return;
    // Ask politely, then make sure.
    if (!dead && to_solver >= 0) {
      const char* bye = "(exit)\n";
      ssize_t ignored = write(to_solver, bye, strlen(bye));
      (void)ignored;
    }
    if (to_solver >= 0) close(to_solver);
    to_solver = -1;
    for (int i = 0; i < 20; i++) {
      int status = 0;
      if (waitpid(pid, &status, WNOHANG) == pid) {
        pid = -1;
        break;
      }
      usleep(10'000);
    }
    kill_solver();
  }

  // -- raw I/O --

  void write_all(const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
      ssize_t n = write(to_solver, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        dead = true;
        throw SessionDead("solver process is gone (" + std::string(strerror(errno)) + ")");
      }
      off += static_cast<size_t>(n);
    }
  }

  // Pull whatever the solver has written, without blocking. False on EOF.
  bool slurp() {
    char chunk[4096];
    for (;;) {
      ssize_t n = read(from_solver, chunk, sizeof chunk);
      if (n > 0) {
        rbuf.append(chunk, static_cast<size_t>(n));
        continue;
      }
      if (n == 0) return false;
      if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
      if (errno == EINTR) continue;
      dead = true;
      throw SessionDead("read from solver failed (" + std::string(strerror(errno)) + ")");
    }
  }

  void wait_readable(Clock::time_point deadline) {
    auto now = Clock::now();
    if (now >= deadline) throw TimeoutSignal{};
    struct pollfd pfd{from_solver, POLLIN, 0};
    int ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    int r = poll(&pfd, 1, std::max(ms, 1));
    if (r == 0) throw TimeoutSignal{};
    if (r < 0 && errno != EINTR)
      throw SessionDead("poll failed (" + std::string(strerror(errno)) + ")");
  }

  struct TimeoutSignal {};

  void compact() {
    if (rpos > 65536) {
      rbuf.erase(0, rpos);
      rpos = 0;
    }
  }

  // One response: either a bare word line or a balanced s-expression.
  // Also the only place EOF is detected.
  std::string read_response(Clock::time_point deadline) {
    auto have = [&](size_t n) { return rbuf.size() - rpos >= n; };
    auto need_more = [&]() {
      if (!slurp()) {
        dead = true;
        throw SessionDead("solver closed its output" + (in_handshake ? std::string(" during startup") : ""));
      }
    };
    // skip whitespace
    for (;;) {
      while (have(1) && std::isspace(static_cast<unsigned char>(rbuf[rpos]))) rpos++;
      if (have(1)) break;
      wait_readable(deadline);
      need_more();
    }
    compact();
    if (rbuf[rpos] != '(') {
      // bare word up to newline
      for (;;) {
        size_t nl = rbuf.find('\n', rpos);
        if (nl != std::string::npos) {
          std::string word = trim(rbuf.substr(rpos, nl - rpos));
          rpos = nl + 1;
          return word;
        }
        wait_readable(deadline);
        need_more();
      }
    }
    // balanced s-expression, tracking quotes
    size_t i = rpos;
    int depth_count = 0;
    bool in_str = false, in_pipe = false;
    for (;;) {
      if (i >= rbuf.size()) {
        wait_readable(deadline);
        need_more();
        continue;
      }
      char c = rbuf[i];
      if (in_str) {
        if (c == '\\') i++;
        else if (c == '"') in_str = false;
      } else if (in_pipe) {
        if (c == '|') in_pipe = false;
      } else if (c == '"') {
        in_str = true;
      } else if (c == '|') {
        in_pipe = true;
      } else if (c == '(') {
        depth_count++;
      } else if (c == ')') {
        depth_count--;
        if (depth_count == 0) {
          std::string text = rbuf.substr(rpos, i + 1 - rpos);
          rpos = i + 1;
          return text;
        }
      }
      i++;
    }
  }

  bool response_ready() {
    slurp();
    // A full response is ready if a newline terminates a bare word, or a
    // balanced sexpr is fully buffered.
    size_t i = rpos;
    while (i < rbuf.size() && std::isspace(static_cast<unsigned char>(rbuf[i]))) i++;
    if (i >= rbuf.size()) return false;
    if (rbuf[i] != '(') return rbuf.find('\n', i) != std::string::npos;
    int depth_count = 0;
    bool in_str = false, in_pipe = false;
    for (; i < rbuf.size(); i++) {
      char c = rbuf[i];
      if (in_str) {
        if (c == '\\') i++;
        else if (c == '"') in_str = false;
      } else if (in_pipe) {
        if (c == '|') in_pipe = false;
      } else if (c == '"') in_str = true;
      else if (c == '|') in_pipe = true;
      else if (c == '(') depth_count++;
      else if (c == ')') {
        if (--depth_count == 0) return true;
      }
    }
    return false;
  }

  // -- command plumbing --

  void note_transcript(const std::string& cmd) {
    if (transcript.is_open()) transcript << cmd << "\n";
  }

  void consume_ack(Clock::time_point deadline) {
    std::string resp = read_response(deadline);
    std::string cmd = pending.front();
    pending.pop_front();
    if (resp == "success") return;
    if (in_handshake)
      throw HandshakeError("solver rejected '" + cmd + "': " + resp);
    throw ProtocolError("solver rejected '" + cmd + "': " + resp);
  }

  // State command: acked eventually, replayed on recycle when at depth 0.
  void emit(const std::string& cmd) {
    if (dead) throw SessionDead("session is dead");
    note_transcript(cmd);
    if (depth == 0) replay.push_back(cmd);
    write_all(cmd + "\n");
    pending.push_back(cmd);
    // Opportunistic draining keeps the solver's output pipe from filling up
    // while staying pipelined on long assertion batches.
    while (!pending.empty() && response_ready())
      consume_ack(Clock::now() + std::chrono::milliseconds(100));
  }

  void drain(Clock::time_point deadline) {
    while (!pending.empty()) consume_ack(deadline);
  }

  // Query command: returns its response after all pending acks.
  std::string ask(const std::string& cmd, Clock::time_point deadline) {
    if (dead) throw SessionDead("session is dead");
    note_transcript(cmd);
    write_all(cmd + "\n");
    drain(deadline);
    return read_response(deadline);
  }

  // -- symbol tracking --

  void declare_name(const std::string& name, Sort sort) {
    auto it = declared_sorts.find(name);
    if (it != declared_sorts.end()) {
      if (it->second != sort)
        throw ProtocolError("'" + name + "' redeclared with a different sort");
      return;
    }
    emit("(declare-fun " + name + " () " + sort_smt(sort) + ")");
    declared_sorts[name] = sort;
    declared_by_depth[depth].push_back(name);
  }

  void declare_term_vars(const TermRef& t, int step) {
    for (const auto& [name, tag] : free_vars(t)) {
      int at = tag == StepTag::Prev ? step - 1 : step;
      declare_name(indexed_name(name, at), var_sort(t, name, tag));
    }
  }

  // Sort of a named variable inside a term (unique per name+tag).
  static Sort var_sort(const TermRef& t, const std::string& name, StepTag tag) {
    if (auto s = try_var_sort(t, name, tag)) return *s;
    throw ProtocolError("variable '" + name + "' not found in term");
  }

  static std::optional<Sort> try_var_sort(const TermRef& t, const std::string& name, StepTag tag) {
    if (t->kind == TermKind::Var && t->var == name && t->tag == tag) return t->sort;
    for (const auto& k : t->kids)
      if (auto s = try_var_sort(k, name, tag)) return s;
    return std::nullopt;
  }

  void claim_label(const std::string& label) {
    if (labels.count(label)) throw LabelClash("assertion label '" + label + "' already in use");
    labels.insert(label);
    labels_by_depth[depth].push_back(label);
  }

  void do_push() {
    emit("(push 1)");
    depth++;
    declared_by_depth.emplace_back();
    labels_by_depth.emplace_back();
  }

  void do_pop() {
    if (depth == 0) throw ProtocolError("pop at scope depth 0");
    emit("(pop 1)");
    for (const auto& n : declared_by_depth.back()) declared_sorts.erase(n);
    for (const auto& l : labels_by_depth.back()) labels.erase(l);
    declared_by_depth.pop_back();
    labels_by_depth.pop_back();
    depth--;
  }

  // -- recycle after a wall-clock timeout --

  void recycle() {
    kill_solver();
    if (transcript.is_open()) transcript << "; session recycled after timeout\n";
    spawn();
    epoch++;
    depth = 0;
    declared_by_depth.resize(1);
    labels_by_depth.resize(1);
    // Names and labels from dissolved scopes are gone.
    std::unordered_map<std::string, Sort> keep_sorts;
    for (const auto& n : declared_by_depth[0]) keep_sorts[n] = declared_sorts.at(n);
    declared_sorts = std::move(keep_sorts);
    std::unordered_set<std::string> keep_labels(labels_by_depth[0].begin(),
                                                labels_by_depth[0].end());
    labels = std::move(keep_labels);
    // Replay the persistent prefix. The replay log is exactly the depth-0
    // state commands, so this restores an equivalent solver state.
    auto deadline = Clock::now() + std::chrono::milliseconds(120'000);
    for (const auto& cmd : replay) {
      write_all(cmd + "\n");
      pending.push_back(cmd);
    }
    drain(deadline);
  }
};

Session::Session(const SolverConfig& cfg, const TransitionSystem& ts, std::string transcript_path)
    : impl_(std::make_unique<Impl>()) {
  ignore_sigpipe_once();
  impl_->cfg = cfg;
  impl_->logic = cfg.logic == "auto" ? ts.smt_logic() : cfg.logic;
  impl_->transcript_path = std::move(transcript_path);
  if (!impl_->transcript_path.empty()) {
    impl_->transcript.open(impl_->transcript_path, std::ios::trunc);
    if (!impl_->transcript) throw IoError("cannot write transcript '" + impl_->transcript_path + "'");
  }
  if (!executable_file(cfg.cmd))
    throw SolverSpawnError("solver executable '" + cfg.cmd + "' not found or not executable");
  impl_->spawn();
  impl_->in_handshake = true;
  try {
    impl_->emit("(set-option :print-success true)");
    impl_->emit("(set-option :produce-models true)");
    if (cfg.unsat_cores) impl_->emit("(set-option :produce-unsat-cores true)");
    if (!cfg.soft_timeout_opt.empty())
      impl_->emit("(set-option " + cfg.soft_timeout_opt + " " + std::to_string(cfg.timeout_ms) +
                  ")");
    impl_->emit("(set-logic " + impl_->logic + ")");
    // First ack can be slow: a cold solver may take a while to come up.
    impl_->drain(Clock::now() + std::chrono::milliseconds(120'000));
  } catch (const Impl::TimeoutSignal&) {
    throw HandshakeError("solver did not answer the initial options in time");
  } catch (const SessionDead& e) {
    throw SolverSpawnError("solver exited during startup: " + std::string(e.what()));
  }
  impl_->in_handshake = false;
}

Session::~Session() = default;

void Session::declare(const std::string& indexed_name, Sort sort) {
  impl_->declare_name(indexed_name, sort);
}

void Session::assert_at(const TermRef& t, int step, const std::string& label) {
  if (t->sort != Sort::Bool) throw SortError("asserted term must be bool");
  impl_->declare_term_vars(t, step);
  std::string phi = smt_at(t, step);
  if (label.empty()) {
    impl_->emit("(assert " + phi + ")");
  } else {
    impl_->claim_label(label);
    impl_->emit("(assert (! " + phi + " :named " + label + "))");
  }
}

void Session::push() { impl_->do_push(); }
void Session::pop() { impl_->do_pop(); }
int Session::depth() const { return impl_->depth; }
std::uint64_t Session::epoch() const { return impl_->epoch; }
long Session::num_checks() const { return impl_->checks; }

Session::Scope::Scope(Session& s) : s_(s), epoch_(s.epoch()) { s.push(); }

Session::Scope::~Scope() {
  if (s_.epoch() != epoch_) return;  // scope dissolved by a recycle
  try {
    s_.pop();
  } catch (...) {
    // A dead session during unwind must not terminate the process.
  }
}

CheckResult Session::check(const std::vector<Assumption>& assumptions,
                           const std::vector<std::string>& want_values) {
  Impl& im = *impl_;
  auto deadline = Clock::now() + std::chrono::milliseconds(
                                     im.cfg.soft_timeout_opt.empty()
                                         ? im.cfg.timeout_ms
                                         : 2 * im.cfg.timeout_ms + 2000);
  im.checks++;
  std::optional<Scope> guard;
  try {
    std::string query = "(check-sat)";
    if (!assumptions.empty()) {
      // Assumptions live in a private scope: an activation variable per
      // assumption, asserted to imply the literal, passed to
      // check-sat-assuming so cores report the labels.
      guard.emplace(*this);
      std::string names;
      for (const auto& a : assumptions) {
        if (a.literal->sort != Sort::Bool) throw SortError("assumption literal must be bool");
        im.declare_term_vars(a.literal, a.step);
        im.declare_name(a.label, Sort::Bool);
        im.claim_label(a.label);
        im.emit("(assert (=> " + a.label + " " + smt_at(a.literal, a.step) + "))");
        names += " " + a.label;
      }
      query = "(check-sat-assuming (" + trim(names) + "))";
    }
    std::string verdict = im.ask(query, deadline);

    CheckResult out;
    if (verdict == "sat") {
      out.kind = CheckResult::Kind::Sat;
      if (!want_values.empty()) {
        std::string req = "(get-value (";
        for (size_t i = 0; i < want_values.size(); i++)
          req += (i ? " " : "") + want_values[i];
        req += "))";
        std::string raw = im.ask(req, deadline);
        if (raw.rfind("(error", 0) == 0) throw ProtocolError("solver error: " + raw);
        Sexp resp = parse_sexp(raw);
        if (!resp.list) throw ProtocolError("malformed get-value response");
        for (const auto& pair : resp.kids) {
          if (!pair.list || pair.kids.size() != 2 || pair.kids[0].list)
            throw ProtocolError("malformed get-value pair");
          const std::string& name = pair.kids[0].atom;
          auto it = im.declared_sorts.find(name);
          if (it == im.declared_sorts.end())
            throw ProtocolError("solver returned a value for undeclared '" + name + "'");
          out.model[name] = coerce_value(parse_model_value(pair.kids[1]), it->second, name);
        }
        for (const auto& w : want_values)
          if (!out.model.count(w)) throw ProtocolError("model is missing '" + w + "'");
      }
    } else if (verdict == "unsat") {
      out.kind = CheckResult::Kind::Unsat;
      if (im.cfg.unsat_cores) {
        Sexp core = parse_sexp(im.ask("(get-unsat-core)", deadline));
        if (!core.list) throw ProtocolError("malformed unsat core");
        for (const auto& l : core.kids)
          if (!l.list) out.core.insert(l.atom);
      }
    } else if (verdict == "unknown") {
      out.kind = CheckResult::Kind::Unknown;
      out.reason = "solver-unknown";
      std::string info = im.ask("(get-info :reason-unknown)", deadline);
      for (const char* token : {"timeout", "canceled", "cancelled", "resource", "max. resource"})
        if (info.find(token) != std::string::npos) out.reason = "timeout";
    } else if (verdict.rfind("(error", 0) == 0) {
      throw ProtocolError("solver error: " + verdict);
    } else {
      throw ProtocolError("unexpected check-sat answer '" + verdict + "'");
    }
    guard.reset();
    return out;
  } catch (const Impl::TimeoutSignal&) {
    im.recycle();  // bumps the epoch, so the guard (if any) skips its pop
    guard.reset();
    CheckResult out;
    out.kind = CheckResult::Kind::Unknown;
    out.reason = "timeout";
    return out;
  }
}

}  // namespace minikind
