#include <sys/stat.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "minikind/elaborate.hpp"
#include "minikind/parser.hpp"
#include "minikind/solver.hpp"
#include "minikind/typecheck.hpp"

using namespace minikind;

TEST_SUITE_BEGIN("solver");

namespace {

std::string build_dir() { return MINIKIND_BUILD_DIR; }

TransitionSystem int_ts() {
  return elaborate(typecheck(parse_source(
      "node main() returns (); var x: int; p: bool;\n"
      "let x = 0 -> pre x + 1; p = x >= 0; --%PROPERTY p; tel;",
      "t.lus")));
}

TransitionSystem mixed_ts() {
  TransitionSystem ts;
  ts.vars = {{"%init", Sort::Bool}, {"x", Sort::Int}, {"y", Sort::Real}};
  return ts;
}

SolverConfig live_config() {
  return load_solver_config(build_dir() + "/solvers.toml", "z3js");
}

// A fake solver for failure-path tests: `lines` of shell placed in a read loop.
std::string write_stub(const std::string& tag, const std::string& loop_body) {
  std::string path = "/tmp/minikind-stub-" + tag + "-" + std::to_string(getpid()) + ".sh";
  {
    std::ofstream out(path);
    out << "#!/bin/sh\n" << loop_body;
  }
  chmod(path.c_str(), 0755);
  return path;
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TermRef ivar(const std::string& n) { return mk_var(n, Sort::Int); }

}  // namespace

TEST_CASE("config file parses and resolves") {
  SolverConfig cfg = live_config();
  CHECK(cfg.name == "z3js");
  CHECK(cfg.cmd.find("z3relay") != std::string::npos);
  CHECK(cfg.cmd.front() == '/');
  CHECK(cfg.soft_timeout_opt.empty());  // wall-clock recycle only for this backend
  CHECK(cfg.unsat_cores);
  CHECK(cfg.timeout_ms == 10000);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(load_solver_config("/nonexistent/solvers.toml"), ConfigError);
  CHECK_THROWS_AS(load_solver_config(build_dir() + "/solvers.toml", "no-such-solver"),
                  ConfigError);

  std::string bad = "/tmp/minikind-badcfg-" + std::to_string(getpid()) + ".toml";
  auto write_cfg = [&](const std::string& text) {
    std::ofstream out(bad);
    out << text;
  };
  write_cfg("cmd = \"z3\"\n");  // key before any section
  CHECK_THROWS_AS(load_solver_config(bad, ""), ConfigError);
  write_cfg("[s]\ncmd = unquoted\n");
  CHECK_THROWS_AS(load_solver_config(bad, "s"), ConfigError);
  write_cfg("[s]\ncmd = \"x\"\nbogus_key = \"y\"\n");
  CHECK_THROWS_AS(load_solver_config(bad, "s"), ConfigError);
  write_cfg("[s]\ncmd = \"x\"\ntimeout_ms = \"lots\"\n");
  CHECK_THROWS_AS(load_solver_config(bad, "s"), ConfigError);
  write_cfg("[s]\ncmd = \"/no/such/solver/binary\"\n");
  CHECK_THROWS_AS(load_solver_config(bad, "s"), ConfigError);
  std::remove(bad.c_str());
}

TEST_CASE("nonexistent executable fails to spawn") {
  SolverConfig cfg = live_config();
  cfg.cmd = "/no/such/solver/binary";
  TransitionSystem ts = int_ts();
  CHECK_THROWS_AS(Session(cfg, ts), SolverSpawnError);
}

TEST_CASE("empty assertion set is sat") {
  TransitionSystem ts = int_ts();
  Session s(live_config(), ts);
  CheckResult r = s.check();
  CHECK(r.sat());
  CHECK(r.model.empty());
  CHECK(s.num_checks() == 1);
}

TEST_CASE("contradiction comes back as a two-label core") {
  TransitionSystem ts = int_ts();
  Session s(live_config(), ts);
  s.assert_at(mk_ge(ivar("x"), mk_int(1)), 0, "L1");
  s.assert_at(mk_le(ivar("x"), mk_int(0)), 0, "L2");
  CheckResult r = s.check();
  REQUIRE(r.unsat());
  CHECK(r.core == std::set<std::string>{"L1", "L2"});
}

TEST_CASE("cores re-assert to unsat on their own") {
  TransitionSystem ts = int_ts();
  std::vector<TermRef> by_label = {mk_ge(ivar("x"), mk_int(1)), mk_le(ivar("x"), mk_int(0))};
  std::set<std::string> core;
  {
    Session s(live_config(), ts);
    s.assert_at(by_label[0], 0, "L1");
    s.assert_at(by_label[1], 0, "L2");
    s.assert_at(mk_ge(ivar("y"), mk_int(5)), 0, "L3");
    core = s.check().core;
  }
  REQUIRE(!core.empty());
  Session fresh(live_config(), ts);
  if (core.count("L1")) fresh.assert_at(by_label[0], 0);
  if (core.count("L2")) fresh.assert_at(by_label[1], 0);
  if (core.count("L3")) fresh.assert_at(mk_ge(ivar("y"), mk_int(5)), 0);
  CHECK(fresh.check().unsat());
}

TEST_CASE("model values come back exact") {
  TransitionSystem ts = mixed_ts();
  Session s(live_config(), ts);
  s.assert_at(mk_eq(ivar("x"), mk_int(-3)), 0);
  s.assert_at(mk_eq(mk_var("y", Sort::Real), mk_real(mpq_class(-7, 2))), 0);
  s.assert_at(mk_eq(mk_var("z", Sort::Real), mk_real(mpq_class(1, 3))), 0);
  s.assert_at(mk_eq(ivar("w"), mk_int(mpz_class("12345678901234567890123", 10))), 0);
  s.assert_at(mk_var("b", Sort::Bool), 0);
  CheckResult r = s.check({}, {"x$0", "y$0", "z$0", "w$0", "b$0"});
  REQUIRE(r.sat());
  CHECK(r.model.at("x$0") == Value(mpz_class(-3)));
  CHECK(r.model.at("y$0") == Value(mpq_class(-7, 2)));
  CHECK(r.model.at("z$0") == Value(mpq_class(1, 3)));
  CHECK(r.model.at("w$0") == Value(mpz_class("12345678901234567890123", 10)));
  CHECK(r.model.at("b$0") == Value(true));
}

TEST_CASE("prev references declare the step -1 instance") {
  TransitionSystem ts = int_ts();
  Session s(live_config(), ts);
  s.assert_at(mk_eq(ivar("x"), mk_add(mk_prev("x", Sort::Int), mk_int(1))), 0);
  s.assert_at(mk_eq(mk_prev("x", Sort::Int), mk_int(41)), 0);
  CheckResult r = s.check({}, {"x$0", "x$-1"});
  REQUIRE(r.sat());
  CHECK(r.model.at("x$0") == Value(mpz_class(42)));
  CHECK(r.model.at("x$-1") == Value(mpz_class(41)));
}

TEST_CASE("scopes isolate assertions and survive exceptions") {
  TransitionSystem ts = int_ts();
  Session s(live_config(), ts);
  s.assert_at(mk_ge(ivar("x"), mk_int(0)), 0);

  CheckResult inner = s.scoped([&] {
    s.assert_at(mk_lt(ivar("x"), mk_int(0)), 0);
    return s.check();
  });
  CHECK(inner.unsat());
  CHECK(s.check().sat());

  // a throwing body still pops its scope
  struct Boom {};
  CHECK_THROWS_AS(s.scoped([&]() -> int {
    s.assert_at(mk_lt(ivar("x"), mk_int(0)), 0);
    throw Boom{};
  }),
                  Boom);
  CHECK(s.depth() == 0);
  CHECK(s.check().sat());

  // nesting three deep stays balanced
  s.scoped([&] {
    return s.scoped([&] { return s.scoped([&] { return s.check(); }); });
  });
  CHECK(s.depth() == 0);
  CHECK(s.check().sat());
}

TEST_CASE("assumptions select cases and label the core") {
  TransitionSystem ts = int_ts();
  Session s(live_config(), ts);
  Assumption five{"A1", mk_eq(ivar("x"), mk_int(5)), 0};
  Assumption seven{"A2", mk_eq(ivar("x"), mk_int(7)), 0};

  CheckResult r1 = s.check({five}, {"x$0"});
  REQUIRE(r1.sat());
  CHECK(r1.model.at("x$0") == Value(mpz_class(5)));

  CheckResult r2 = s.check({five, seven});
  REQUIRE(r2.unsat());
  CHECK(r2.core == std::set<std::string>{"A1", "A2"});

  // assumption labels are transient; re-use across calls is fine
  CheckResult r3 = s.check({seven}, {"x$0"});
  REQUIRE(r3.sat());
  CHECK(r3.model.at("x$0") == Value(mpz_class(7)));
  CHECK(s.depth() == 0);
}

TEST_CASE("duplicate labels clash, popped labels free up") {
  TransitionSystem ts = int_ts();
  Session s(live_config(), ts);
  s.assert_at(mk_ge(ivar("x"), mk_int(0)), 0, "L");
  CHECK_THROWS_AS(s.assert_at(mk_ge(ivar("x"), mk_int(1)), 0, "L"), LabelClash);
  s.scoped([&] {
    CHECK_THROWS_AS(s.assert_at(mk_ge(ivar("x"), mk_int(1)), 0, "L"), LabelClash);
    s.assert_at(mk_ge(ivar("x"), mk_int(1)), 0, "M");
    return 0;
  });
  s.assert_at(mk_ge(ivar("x"), mk_int(2)), 0, "M");  // scope popped, M free again
  CHECK(s.check().sat());
}

TEST_CASE("wall-clock timeout recycles the session") {
  std::string stub = write_stub("slow",
                                "while read line; do\n"
                                "  case \"$line\" in\n"
                                "    '(exit)') exit 0;;\n"
                                "    '(check-sat'*) sleep 5; echo sat;;\n"
                                "    *) echo success;;\n"
                                "  esac\n"
                                "done\n");
  SolverConfig cfg;
  cfg.name = "stub";
  cfg.cmd = stub;
  cfg.unsat_cores = false;
  cfg.timeout_ms = 300;
  TransitionSystem ts = int_ts();
  Session s(cfg, ts);
  s.assert_at(mk_ge(ivar("x"), mk_int(0)), 0);
  CHECK(s.epoch() == 0);
  CheckResult r = s.check();
  CHECK(r.unknown());
  CHECK(r.reason == "timeout");
  CHECK(s.epoch() == 1);
  // the replayed session accepts further commands
  s.assert_at(mk_ge(ivar("x"), mk_int(1)), 0);
  std::remove(stub.c_str());
}

TEST_CASE("recycle dissolves open scopes without unbalanced pops") {
  std::string stub = write_stub("slow2",
                                "while read line; do\n"
                                "  case \"$line\" in\n"
                                "    '(exit)') exit 0;;\n"
                                "    '(check-sat'*) sleep 5; echo sat;;\n"
                                "    *) echo success;;\n"
                                "  esac\n"
                                "done\n");
  SolverConfig cfg;
  cfg.name = "stub";
  cfg.cmd = stub;
  cfg.unsat_cores = false;
  cfg.timeout_ms = 300;
  TransitionSystem ts = int_ts();
  Session s(cfg, ts);
  CheckResult r = s.scoped([&] {
    s.assert_at(mk_ge(ivar("x"), mk_int(0)), 0);
    return s.check();
  });
  CHECK(r.unknown());
  CHECK(s.depth() == 0);
  CHECK(s.epoch() == 1);
  std::remove(stub.c_str());
}

TEST_CASE("a crashed solver reads as SessionDead") {
  std::string stub = write_stub("dying",
                                "n=0\n"
                                "while read line; do\n"
                                "  echo success\n"
                                "  n=$((n+1))\n"
                                "  if [ $n -ge 4 ]; then exit 0; fi\n"
                                "done\n");
  SolverConfig cfg;
  cfg.name = "stub";
  cfg.cmd = stub;
  cfg.unsat_cores = true;  // handshake is then exactly 4 commands
  TransitionSystem ts = int_ts();
  Session s(cfg, ts);
  auto poke = [&] {
    for (int i = 0; i < 100; i++) {
      s.assert_at(mk_ge(ivar("x"), mk_int(i)), i);
      usleep(2000);
    }
    s.check();
  };
  CHECK_THROWS_AS(poke(), SessionDead);
  std::remove(stub.c_str());
}

TEST_CASE("logic is derived from the system when set to auto") {
  std::string t1 = "/tmp/minikind-tr1-" + std::to_string(getpid()) + ".smt2";
  TransitionSystem ts = mixed_ts();
  {
    Session s(live_config(), ts, t1);
    s.check();
  }
  CHECK(slurp_file(t1).find("(set-logic QF_LIRA)") != std::string::npos);
  std::remove(t1.c_str());
}

TEST_CASE("identical command sequences give identical transcripts") {
  std::string t1 = "/tmp/minikind-tra-" + std::to_string(getpid()) + ".smt2";
  std::string t2 = "/tmp/minikind-trb-" + std::to_string(getpid()) + ".smt2";
  TransitionSystem ts = int_ts();
  for (const std::string& path : {t1, t2}) {
    Session s(live_config(), ts, path);
    s.assert_at(mk_ge(ivar("x"), mk_int(0)), 0, "L1");
    s.scoped([&] {
      s.assert_at(mk_lt(ivar("x"), mk_int(10)), 1);
      return s.check({}, {"x$0"});
    });
    s.check({{"A", mk_eq(ivar("x"), mk_int(3)), 0}});
  }
  std::string a = slurp_file(t1), b = slurp_file(t2);
  CHECK(!a.empty());
  CHECK(a == b);
  std::remove(t1.c_str());
  std::remove(t2.c_str());
}

TEST_SUITE_END();
