#include <chrono>
#include <functional>
#include <memory>
#include <set>
#include <thread>

#include "doctest.h"
#include "minikind/elaborate.hpp"
#include "minikind/framework.hpp"
#include "minikind/parser.hpp"
#include "minikind/typecheck.hpp"

using namespace minikind;

TEST_SUITE_BEGIN("framework");

namespace {

// Counter whose single property holds from step 1 on but fails at step 0.
const char* kCtrFalse = R"(node main(reset: bool) returns ();
var
  x: int;
  ok: bool;
let
  x = if reset then 0 else (0 -> pre x + 1);
  ok = x >= 1;
  --%PROPERTY ok;
tel;
)";

// Same counter with a property that actually holds.
const char* kCtrTrue = R"(node main(reset: bool) returns ();
var
  x: int;
  ok: bool;
let
  x = if reset then 0 else (0 -> pre x + 1);
  ok = x >= 0;
  --%PROPERTY ok;
tel;
)";

// Two-property variant so one verdict does not end the whole run.
const char* kCtrTwo = R"(node main(reset: bool) returns ();
var
  x: int;
  ok1: bool;
  ok2: bool;
let
  x = if reset then 0 else (0 -> pre x + 1);
  ok1 = x >= 0;
  ok2 = x >= 0;
  --%PROPERTY ok1;
  --%PROPERTY ok2;
tel;
)";

TransitionSystem elab(const std::string& src) {
  return elaborate(typecheck(parse_source(src, "m.lus")));
}

RunConfig quick_config() {
  RunConfig cfg;
  cfg.timeout_ms = 20'000;  // tests that want a timeout shrink this themselves
  return cfg;
}

// An engine whose behaviour is a lambda, so each test scripts the exact
// message traffic it wants to exercise.
class ScriptEngine : public Engine {
 public:
  using Body = std::function<void(Framework&, ScriptEngine&)>;
  ScriptEngine(std::string name, Body body) : Engine(std::move(name)), body_(std::move(body)) {}
  void run(Framework& fw) override { body_(fw, *this); }

 private:
  Body body_;
};

Message valid_msg(const std::string& engine, const std::string& prop, int k) {
  Message m;
  m.kind = Message::Kind::Valid;
  m.engine = engine;
  m.property = prop;
  m.k = k;
  return m;
}

Message base_msg(const std::string& engine, int k) {
  Message m;
  m.kind = Message::Kind::BaseStep;
  m.engine = engine;
  m.k = k;
  return m;
}

Message inductive_msg(const std::string& engine, const std::string& prop, int k,
                      std::vector<TermRef> invs) {
  Message m;
  m.kind = Message::Kind::InductiveOnly;
  m.engine = engine;
  m.property = prop;
  m.k = k;
  m.invariants = std::move(invs);
  return m;
}

Message invariants_msg(const std::string& engine, std::vector<TermRef> invs) {
  Message m;
  m.kind = Message::Kind::Invariants;
  m.engine = engine;
  m.invariants = std::move(invs);
  return m;
}

Message falsified_msg(const std::string& engine, const std::string& prop, Trace trace) {
  Message m;
  m.kind = Message::Kind::Falsified;
  m.engine = engine;
  m.property = prop;
  m.trace = std::move(trace);
  return m;
}

std::map<std::string, Value> ctr_step(bool init, bool reset, long x) {
  return {{"%init", Value(init)},
          {"reset", Value(reset)},
          {"x", Value::int_of(x)},
          {"ok", Value(x >= 1)}};
}

// reset stays low for `len - 1` steps, then goes high: x returns to 0 and the
// kCtrFalse property fails exactly at the last step.
Trace ctr_trace(int len) {
  Trace t;
  t.steps.push_back(ctr_step(true, false, 0));
  for (int i = 1; i < len - 1; i++) t.steps.push_back(ctr_step(false, false, i));
  if (len > 1) t.steps.push_back(ctr_step(false, true, 0));
  return t;
}

// Spin at checkpoints until pred() holds; gives up after `limit` handoffs so a
// broken test fails instead of hanging until the run deadline.
template <typename F>
bool wait_for(Framework& fw, Engine& self, F pred, int limit = 20000) {
  for (int i = 0; i < limit; i++) {
    if (pred()) return true;
    fw.checkpoint(self);
  }
  return false;
}

}  // namespace

TEST_CASE("direct Valid resolves and cancels the idle engine") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("pdr", [](Framework& f, ScriptEngine& self) {
    f.checkpoint(self);
    f.broadcast(self, valid_msg("pdr", "ok", 1));
  }));
  // Loops forever; only the all-resolved cancellation can stop it.
  fw.add_engine(std::make_unique<ScriptEngine>("idle", [](Framework& f, ScriptEngine& self) {
    for (;;) f.checkpoint(self);
  }));
  RunOutcome out = fw.run();
  REQUIRE(out.results.size() == 1);
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Valid);
  CHECK(out.results[0].engine == "pdr");
  CHECK(out.results[0].k == 1);
  CHECK(out.stats.engine_errors.empty());
}

TEST_CASE("first writer wins on duplicate verdicts") {
  TransitionSystem ts = elab(kCtrTwo);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("e1", [](Framework& f, ScriptEngine& self) {
    f.broadcast(self, valid_msg("e1", "ok1", 2));
    for (;;) f.checkpoint(self);
  }));
  // e2 waits until it observes e1's Valid on the bus, then claims the same
  // property with a different k; the director must keep e1's answer.
  bool saw_valid = false;
  fw.add_engine(std::make_unique<ScriptEngine>("e2", [&](Framework& f, ScriptEngine& self) {
    wait_for(f, self, [&] {
      for (const Message& m : f.take_inbox(self))
        if (m.kind == Message::Kind::Valid && m.property == "ok1") saw_valid = true;
      return saw_valid;
    });
    f.broadcast(self, valid_msg("e2", "ok1", 9));
    f.broadcast(self, valid_msg("e2", "ok2", 4));  // ends the run
    for (;;) f.checkpoint(self);
  }));
  RunOutcome out = fw.run();
  CHECK(saw_valid);
  REQUIRE(out.results.size() == 2);
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Valid);
  CHECK(out.results[0].engine == "e1");
  CHECK(out.results[0].k == 2);
  CHECK(out.results[1].engine == "e2");
  CHECK(out.results[1].k == 4);
}

TEST_CASE("InductiveOnly waits for a deep enough base step") {
  TransitionSystem ts = elab(kCtrTrue);
  RunConfig cfg = quick_config();
  Framework fw(ts, cfg);
  TermRef inv = mk_ge(mk_var("x", Sort::Int), mk_int(0));
  bool resolved_after_k1 = true;
  fw.add_engine(std::make_unique<ScriptEngine>("kind", [&](Framework& f, ScriptEngine& self) {
    f.broadcast(self, inductive_msg("kind", "ok", 3, {inv}));
    for (;;) f.checkpoint(self);
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [&](Framework& f, ScriptEngine& self) {
    // Wait until the InductiveOnly claim is on the bus so the ordering is
    // fixed regardless of the schedule seed.
    bool seen = false;
    wait_for(f, self, [&] {
      for (const Message& m : f.take_inbox(self))
        if (m.kind == Message::Kind::InductiveOnly) seen = true;
      return seen;
    });
    f.broadcast(self, base_msg("bmc", 1));  // k-1 = 2 > 1: not enough yet
    f.checkpoint(self);
    resolved_after_k1 = f.resolved("ok");
    f.broadcast(self, base_msg("bmc", 2));  // now the gate opens
    for (;;) f.checkpoint(self);
  }));
  RunOutcome out = fw.run();
  CHECK(!resolved_after_k1);
  REQUIRE(out.results[0].verdict == PropertyResult::Verdict::Valid);
  CHECK(out.results[0].engine == "kind");
  CHECK(out.results[0].k == 3);
  REQUIRE(out.results[0].invariants.size() == 1);
  CHECK(term_eq(out.results[0].invariants[0], inv));
}

TEST_CASE("InductiveOnly resolves immediately when the base is already deep") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [](Framework& f, ScriptEngine& self) {
    f.broadcast(self, base_msg("bmc", 5));
    for (;;) f.checkpoint(self);
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("kind", [](Framework& f, ScriptEngine& self) {
    bool seen = false;
    wait_for(f, self, [&] {
      for (const Message& m : f.take_inbox(self))
        if (m.kind == Message::Kind::BaseStep && m.k >= 2) seen = true;
      return seen;
    });
    f.broadcast(self, inductive_msg("kind", "ok", 3, {}));
    for (;;) f.checkpoint(self);
  }));
  RunOutcome out = fw.run();
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Valid);
  CHECK(out.results[0].engine == "kind");
}

TEST_CASE("pending induction without a base engine reports no-base-engine") {
  TransitionSystem ts = elab(kCtrTrue);
  RunConfig cfg = quick_config();
  cfg.enable_bmc = false;
  Framework fw(ts, cfg);
  fw.add_engine(std::make_unique<ScriptEngine>("kind", [](Framework& f, ScriptEngine& self) {
    f.checkpoint(self);
    f.broadcast(self, inductive_msg("kind", "ok", 3, {}));
  }));
  RunOutcome out = fw.run();
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Unknown);
  CHECK(out.results[0].unknown_reason == "no-base-engine");
}

TEST_CASE("engines giving up leaves the property exhausted") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [](Framework& f, ScriptEngine& self) {
    f.checkpoint(self);
    f.checkpoint(self);
  }));
  RunOutcome out = fw.run();
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Unknown);
  CHECK(out.results[0].unknown_reason == "exhausted");
}

TEST_CASE("global deadline turns open properties into timeouts") {
  TransitionSystem ts = elab(kCtrTrue);
  RunConfig cfg = quick_config();
  cfg.timeout_ms = 80;
  Framework fw(ts, cfg);
  fw.add_engine(std::make_unique<ScriptEngine>("slow", [](Framework& f, ScriptEngine& self) {
    for (;;) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      f.checkpoint(self);
    }
  }));
  RunOutcome out = fw.run();
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Unknown);
  CHECK(out.results[0].unknown_reason == "timeout");
}

TEST_CASE("a falsification ships with its validated trace") {
  TransitionSystem ts = elab(kCtrFalse);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [](Framework& f, ScriptEngine& self) {
    f.checkpoint(self);
    f.broadcast(self, falsified_msg("bmc", "ok", ctr_trace(1)));
  }));
  RunOutcome out = fw.run();
  REQUIRE(out.results[0].verdict == PropertyResult::Verdict::Falsified);
  CHECK(out.results[0].engine == "bmc");
  REQUIRE(out.results[0].trace.has_value());
  CHECK(out.results[0].trace->length() == 1);
  CHECK(out.results[0].cex_note.empty());
}

TEST_CASE("a trace that does not replay is rejected as a protocol violation") {
  TransitionSystem ts = elab(kCtrFalse);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("rogue", [](Framework& f, ScriptEngine& self) {
    Trace t = ctr_trace(2);
    t.steps[1]["x"] = Value::int_of(5);  // breaks the counter equation
    f.broadcast(self, falsified_msg("rogue", "ok", t));
  }));
  RunOutcome out = fw.run();
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Unknown);
  REQUIRE(out.stats.engine_errors.size() == 1);
  CHECK(out.stats.engine_errors[0].find("bogus trace") != std::string::npos);
}

TEST_CASE("messages about unknown properties are protocol violations") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("rogue", [](Framework& f, ScriptEngine& self) {
    f.broadcast(self, valid_msg("rogue", "no_such_prop", 1));
  }));
  RunOutcome out = fw.run();
  REQUIRE(out.stats.engine_errors.size() == 1);
  CHECK(out.stats.engine_errors[0].find("unknown property") != std::string::npos);
}

TEST_CASE("invariant broadcasts are deduplicated structurally") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework fw(ts, quick_config());
  TermRef x = mk_var("x", Sort::Int);
  TermRef t1 = mk_ge(x, mk_int(0));
  TermRef t2 = mk_le(x, mk_int(100));
  TermRef t3 = mk_not(mk_lt(x, mk_int(-1)));
  // Structurally equal reconstructions, fresh nodes on purpose.
  TermRef t1_again = mk_ge(mk_var("x", Sort::Int), mk_int(0));
  TermRef t2_again = mk_le(mk_var("x", Sort::Int), mk_int(100));
  fw.add_engine(std::make_unique<ScriptEngine>("invgen", [&](Framework& f, ScriptEngine& self) {
    f.broadcast(self, invariants_msg("invgen", {t1, t2}));
    f.checkpoint(self);
    f.broadcast(self, invariants_msg("invgen", {t2_again, t3}));
    f.checkpoint(self);
    f.broadcast(self, invariants_msg("invgen", {t1_again}));  // fully duplicate: dropped
  }));
  std::vector<std::vector<TermRef>> seen;
  fw.add_engine(std::make_unique<ScriptEngine>("kind", [&](Framework& f, ScriptEngine& self) {
    size_t total = 0;
    wait_for(f, self, [&] {
      for (Message& m : f.take_inbox(self))
        if (m.kind == Message::Kind::Invariants) {
          total += m.invariants.size();
          seen.push_back(m.invariants);
        }
      return total >= 3;
    });
    // Give the sender a chance to emit the duplicate-only broadcast too.
    for (int i = 0; i < 50; i++) f.checkpoint(self);
    for (Message& m : f.take_inbox(self))
      if (m.kind == Message::Kind::Invariants) seen.push_back(m.invariants);
  }));
  RunOutcome out = fw.run();
  CHECK(out.stats.invariants_broadcast == 3);
  REQUIRE(seen.size() == 2);
  REQUIRE(seen[0].size() == 2);
  CHECK(term_eq(seen[0][0], t1));
  CHECK(term_eq(seen[0][1], t2));
  REQUIRE(seen[1].size() == 1);  // the repeat of t2 was filtered out
  CHECK(term_eq(seen[1][0], t3));
}

TEST_CASE("minimal-cex holds a long trace until the base search confirms it") {
  TransitionSystem ts = elab(kCtrFalse);
  RunConfig cfg = quick_config();
  cfg.minimal_cex = true;
  Framework fw(ts, cfg);
  bool still_open_after_send = false;
  TermRef marker = mk_var("reset", Sort::Bool);
  fw.add_engine(std::make_unique<ScriptEngine>("pdr", [&](Framework& f, ScriptEngine& self) {
    f.broadcast(self, falsified_msg("pdr", "ok", ctr_trace(3)));
    f.broadcast(self, invariants_msg("pdr", {marker}));  // "I have sent it" signal
    for (;;) f.checkpoint(self);
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [&](Framework& f, ScriptEngine& self) {
    bool seen = false;
    wait_for(f, self, [&] {
      for (const Message& m : f.take_inbox(self))
        if (m.kind == Message::Kind::Invariants) seen = true;
      return seen;
    });
    still_open_after_send = !f.resolved("ok");
    f.broadcast(self, base_msg("bmc", 1));
    f.checkpoint(self);
    f.broadcast(self, base_msg("bmc", 2));  // length 3 needs depth 2 clean
    for (;;) f.checkpoint(self);
  }));
  RunOutcome out = fw.run();
  CHECK(still_open_after_send);
  REQUIRE(out.results[0].verdict == PropertyResult::Verdict::Falsified);
  CHECK(out.results[0].engine == "pdr");
  CHECK(out.results[0].trace->length() == 3);
  CHECK(out.results[0].cex_note.empty());
}

TEST_CASE("minimal-cex lets a shorter base-search trace supersede a held one") {
  TransitionSystem ts = elab(kCtrFalse);
  RunConfig cfg = quick_config();
  cfg.minimal_cex = true;
  Framework fw(ts, cfg);
  TermRef marker = mk_var("reset", Sort::Bool);
  fw.add_engine(std::make_unique<ScriptEngine>("pdr", [&](Framework& f, ScriptEngine& self) {
    f.broadcast(self, falsified_msg("pdr", "ok", ctr_trace(3)));
    f.broadcast(self, invariants_msg("pdr", {marker}));
    for (;;) f.checkpoint(self);
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [&](Framework& f, ScriptEngine& self) {
    bool seen = false;
    wait_for(f, self, [&] {
      for (const Message& m : f.take_inbox(self))
        if (m.kind == Message::Kind::Invariants) seen = true;
      return seen;
    });
    f.broadcast(self, falsified_msg("bmc", "ok", ctr_trace(1)));
  }));
  RunOutcome out = fw.run();
  REQUIRE(out.results[0].verdict == PropertyResult::Verdict::Falsified);
  CHECK(out.results[0].engine == "bmc");
  CHECK(out.results[0].trace->length() == 1);
}

TEST_CASE("minimal-cex releases a held trace when the base search gives up") {
  TransitionSystem ts = elab(kCtrFalse);
  RunConfig cfg = quick_config();
  cfg.minimal_cex = true;
  Framework fw(ts, cfg);
  TermRef marker = mk_var("reset", Sort::Bool);
  fw.add_engine(std::make_unique<ScriptEngine>("pdr", [&](Framework& f, ScriptEngine& self) {
    f.broadcast(self, falsified_msg("pdr", "ok", ctr_trace(3)));
    f.broadcast(self, invariants_msg("pdr", {marker}));
    for (;;) f.checkpoint(self);
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [&](Framework& f, ScriptEngine& self) {
    bool seen = false;
    wait_for(f, self, [&] {
      for (const Message& m : f.take_inbox(self))
        if (m.kind == Message::Kind::Invariants) seen = true;
      return seen;
    });
    // Returning without a BaseStep: the engine is done, depth 2 never cleared.
  }));
  RunOutcome out = fw.run();
  REQUIRE(out.results[0].verdict == PropertyResult::Verdict::Falsified);
  CHECK(out.results[0].engine == "pdr");
  CHECK(out.results[0].trace->length() == 3);
  CHECK(out.results[0].cex_note.find("not confirmed minimal") != std::string::npos);
}

TEST_CASE("minimal-cex without a base engine ships the trace with a note") {
  TransitionSystem ts = elab(kCtrFalse);
  RunConfig cfg = quick_config();
  cfg.minimal_cex = true;
  cfg.enable_bmc = false;
  Framework fw(ts, cfg);
  fw.add_engine(std::make_unique<ScriptEngine>("pdr", [](Framework& f, ScriptEngine& self) {
    f.broadcast(self, falsified_msg("pdr", "ok", ctr_trace(3)));
  }));
  RunOutcome out = fw.run();
  REQUIRE(out.results[0].verdict == PropertyResult::Verdict::Falsified);
  CHECK(out.results[0].cex_note.find("no depth search") != std::string::npos);
}

TEST_CASE("one crashing engine does not take down its siblings") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("bad", [](Framework& f, ScriptEngine& self) {
    f.checkpoint(self);
    throw std::runtime_error("boom");
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("good", [](Framework& f, ScriptEngine& self) {
    for (int i = 0; i < 20; i++) f.checkpoint(self);
    f.broadcast(self, valid_msg("good", "ok", 1));
  }));
  RunOutcome out = fw.run();
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Valid);
  CHECK(out.results[0].engine == "good");
  REQUIRE(out.stats.engine_errors.size() == 1);
  CHECK(out.stats.engine_errors[0] == "bad: boom");
}

TEST_CASE("a failing solver spawn is isolated to its engine") {
  TransitionSystem ts = elab(kCtrTrue);
  RunConfig cfg = quick_config();
  cfg.solver.name = "ghost";
  cfg.solver.cmd = "/nonexistent/solver-binary";
  Framework fw(ts, cfg);
  fw.add_engine(std::make_unique<ScriptEngine>("pdr", [](Framework& f, ScriptEngine& self) {
    SessionPtr s = f.make_session(self, "p");  // throws SolverSpawnError
    (void)s;
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("bmc", [](Framework& f, ScriptEngine& self) {
    for (int i = 0; i < 20; i++) f.checkpoint(self);
    f.broadcast(self, valid_msg("bmc", "ok", 1));
  }));
  RunOutcome out = fw.run();
  CHECK(out.results[0].verdict == PropertyResult::Verdict::Valid);
  REQUIRE(out.stats.engine_errors.size() == 1);
  CHECK(out.stats.engine_errors[0].find("pdr:") == 0);
}

TEST_CASE("solver call counts are aggregated per engine") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework fw(ts, quick_config());
  fw.add_engine(std::make_unique<ScriptEngine>("a", [](Framework& f, ScriptEngine& self) {
    f.note_checks(self, 3);
    f.note_checks(self, 4);
  }));
  fw.add_engine(std::make_unique<ScriptEngine>("b", [](Framework& f, ScriptEngine& self) {
    f.note_checks(self, 5);
  }));
  RunOutcome out = fw.run();
  CHECK(out.stats.check_sat_calls == 12);
  CHECK(out.stats.checks_per_engine.at("a") == 7);
  CHECK(out.stats.checks_per_engine.at("b") == 5);
}

TEST_CASE("configuration errors: no engines or no properties") {
  TransitionSystem ts = elab(kCtrTrue);
  Framework empty(ts, quick_config());
  CHECK_THROWS_AS(empty.run(), ConfigError);

  TransitionSystem bare = elab(
      "node main(u: int) returns (y: int);\nlet y = u; tel;\n");
  Framework noprops(bare, quick_config());
  noprops.add_engine(std::make_unique<ScriptEngine>("bmc", [](Framework&, ScriptEngine&) {}));
  CHECK_THROWS_AS(noprops.run(), ConfigError);
}

TEST_CASE("the schedule is a pure function of the seed") {
  auto record_run = [](std::uint64_t seed) {
    TransitionSystem ts = elab(kCtrTrue);
    RunConfig cfg = quick_config();
    cfg.seed = seed;
    Framework fw(ts, cfg);
    auto order = std::make_shared<std::vector<std::string>>();
    for (const char* name : {"a", "b", "c"}) {
      fw.add_engine(std::make_unique<ScriptEngine>(
          name, [order, name](Framework& f, ScriptEngine& self) {
            for (int i = 0; i < 6; i++) {
              order->push_back(name);
              f.checkpoint(self);
            }
          }));
    }
    fw.run();
    return *order;
  };
  std::vector<std::string> first = record_run(7);
  std::vector<std::string> second = record_run(7);
  CHECK(first == second);
  CHECK(first.size() == 18);
  // All three engines interleave rather than running back to back.
  CHECK(std::set<std::string>(first.begin(), first.begin() + 9).size() == 3);
}

TEST_SUITE_END();
