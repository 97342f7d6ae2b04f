#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "minikind/term.hpp"
#include "minikind/transition_system.hpp"

namespace minikind {

// One entry from a solvers.toml file. `cmd` is resolved to an executable path
// at load time (relative names are tried against the config file's directory
// first, then $PATH).
struct SolverConfig {
  std::string name;              // section the entry came from
  std::string cmd;
  std::vector<std::string> args;
  std::string logic = "auto";    // "auto" derives QF_LIA/QF_LRA/QF_LIRA from the system
  bool unsat_cores = true;
  int timeout_ms = 10000;        // per-query wall clock
  std::string soft_timeout_opt;  // option to pass timeout_ms to the solver itself, e.g. ":timeout"
};

// Load `section` from the config file; with an empty section, pick the first
// section whose executable resolves. Throws ConfigError.
SolverConfig load_solver_config(const std::string& path, const std::string& section = "");

struct CheckResult {
  enum class Kind { Sat, Unsat, Unknown };
  Kind kind = Kind::Unknown;
  std::map<std::string, Value> model;  // indexed name -> value, for requested names
  std::set<std::string> core;          // labels of named assertions and assumptions
  std::string reason;                  // set when kind == Unknown

  bool sat() const { return kind == Kind::Sat; }
  bool unsat() const { return kind == Kind::Unsat; }
  bool unknown() const { return kind == Kind::Unknown; }
};

// A labeled assumption for one check() call: holds only for that query, and
// `label` shows up in the unsat core when the literal contributes.
struct Assumption {
  std::string label;
  TermRef literal;  // bool-sorted term
  int step;
};

// One SMT solver subprocess speaking SMT-LIB2 over stdin/stdout. Confined to a
// single engine task; never shared between threads.
//
// Variables are declared on demand: asserting a term at step i declares every
// v$i (and v$(i-1) for `pre` references) it mentions. Queries that time out by
// wall clock recycle the subprocess: kill, restart, replay every state command
// issued at scope depth 0. Scopes opened at the time of a recycle are gone;
// Scope guards detect this via the epoch and skip their pop.
class Session {
 public:
  Session(const SolverConfig& cfg, const TransitionSystem& ts, std::string transcript_path = "");
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Declare an indexed (or otherwise flat) name explicitly. Idempotent per
  // scope; needed only for auxiliary variables that first appear in a
  // get-value request rather than an assertion.
  void declare(const std::string& indexed_name, Sort sort);

  // Assert `t` instantiated at `step`. A nonempty label emits
  // (assert (! phi :named L)); reusing a live label raises LabelClash.
  void assert_at(const TermRef& t, int step, const std::string& label = "");

  // check-sat / check-sat-assuming. On sat, fetches values for `want_values`
  // (indexed names, which must be declared). On unsat with cores enabled,
  // fetches the core. Assumptions live in a transient scope private to this
  // call, so their labels may be reused across calls.
  CheckResult check(const std::vector<Assumption>& assumptions = {},
                    const std::vector<std::string>& want_values = {});

  void push();
  void pop();
  int depth() const;
  std::uint64_t epoch() const;

  // Number of check-sat queries issued, for the run statistics.
  long num_checks() const;

  // RAII scope: push on entry, pop on exit unless a recycle dissolved the
  // scope in between.
  class Scope {
   public:
    explicit Scope(Session& s);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Session& s_;
    std::uint64_t epoch_;
  };

  template <class F>
  auto scoped(F&& body) {
    Scope guard(*this);
    return body();
  }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

using SessionPtr = std::unique_ptr<Session>;

}  // namespace minikind
