#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "minikind/solver.hpp"
#include "minikind/trace.hpp"
#include "minikind/transition_system.hpp"

namespace minikind {

// Everything engines exchange over the bus.
struct Message {
  enum class Kind {
    Invariants,     // proved terms over system variables
    BaseStep,       // BMC: no unresolved property fails through depth k
    Valid,          // proof, reported directly (PDR)
    Falsified,      // counterexample trace
    InductiveOnly,  // k-induction step succeeded; base case still pending
    Done            // engine has no more work
  };
  Kind kind;
  std::string engine;               // sender
  std::string property;             // Valid / Falsified / InductiveOnly
  int k = 0;                        // BaseStep depth, Valid k, InductiveOnly k
  std::vector<TermRef> invariants;  // Invariants payload; invariants used for Valid
  Trace trace;                      // Falsified payload
};

struct RunConfig {
  bool enable_bmc = true;
  bool enable_kind = true;
  bool enable_invgen = true;
  bool enable_pdr = true;
  int bmc_max_depth = 200;
  int kind_max_k = 20;
  int timeout_ms = 60'000;  // whole-run budget
  std::uint64_t seed = 0;
  int sched_spread = 16;  // virtual-time jitter range for the scheduler
  bool minimal_cex = false;
  SolverConfig solver;
  std::string dump_smt_dir;                // empty: no transcripts
  std::vector<TermRef> advice_invariants;  // candidate seeds from a prior run
};

struct PropertyResult {
  enum class Verdict { Valid, Falsified, Unknown };
  std::string name;
  Verdict verdict = Verdict::Unknown;
  std::string engine;  // winner
  int k = 0;           // induction depth for Valid verdicts
  std::vector<TermRef> invariants;
  std::optional<Trace> trace;  // Falsified
  std::string unknown_reason;  // Unknown: timeout | exhausted | no-base-engine
  std::string cex_note;        // set when a counterexample ships without minimality confirmation

  // Filled by post-processing, carried here so reporting sees one record.
  std::optional<std::vector<std::string>> ivc;
  bool ivc_minimal = false;
  std::optional<Trace> smoothed;
  std::string smoothed_note;
  long time_ms = 0;
};

struct RunStats {
  long check_sat_calls = 0;
  long messages = 0;
  long invariants_broadcast = 0;
  std::map<std::string, long> checks_per_engine;
  std::vector<std::string> engine_errors;  // "<engine>: <what>" for isolated failures
};

struct RunOutcome {
  std::vector<PropertyResult> results;  // property declaration order
  RunStats stats;
};

class Framework;

// Thrown at a checkpoint when the framework wants the engine gone. Engines
// must let it escape their run().
struct Cancelled {};

// One verification engine. The framework runs each engine on its own thread,
// but threads take turns under a seeded virtual-time scheduler: exactly one
// runs at a time, and the handoff points (checkpoints) make the interleaving a
// pure function of the seed.
class Engine {
 public:
  explicit Engine(std::string name) : name_(std::move(name)) {}
  virtual ~Engine() = default;
  const std::string& name() const { return name_; }

  virtual void run(Framework& fw) = 0;

 private:
  std::string name_;
};

class Framework {
 public:
  Framework(const TransitionSystem& ts, RunConfig cfg);
  ~Framework();
  Framework(const Framework&) = delete;
  Framework& operator=(const Framework&) = delete;

  void add_engine(std::unique_ptr<Engine> engine);

  // Runs all engines to completion and aggregates verdicts. ConfigError when
  // no engines were added or the system has no properties.
  RunOutcome run();

  // --- engine-facing surface (valid only while run() is active) ---
  const TransitionSystem& ts() const;
  const RunConfig& config() const;

  // Scheduling handoff and cancellation point; engines call this between
  // solver queries.
  void checkpoint(Engine& who);

  void broadcast(Engine& who, Message msg);
  std::vector<Message> take_inbox(Engine& who);
  bool resolved(const std::string& property) const;
  bool all_resolved() const;

  // Session construction with transcript naming and stats accounting. The
  // returned session is owned by the engine; its query count is collected
  // through `note_checks` at engine exit.
  SessionPtr make_session(Engine& who, const std::string& tag);
  void note_checks(Engine& who, long nchecks);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace minikind
