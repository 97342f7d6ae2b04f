#include "minikind/engine_pdr.hpp"

#include <algorithm>
#include <set>

#include "minikind/engine_support.hpp"

namespace minikind {

namespace {

// One cube literal over a state variable. The init flag is an equality on a
// bool; numeric literals start as equalities from model values and may be
// weakened to inequalities during generalization.
struct Lit {
  std::string var;
  bool is_flag = false;
  enum class Rel { Eq, Le, Ge } rel = Rel::Eq;
  Value val;
};
using Cube = std::vector<Lit>;

struct Obligation {
  Cube cube;
  int level;
  size_t order;  // creation index, the queue tiebreaker
  int parent;    // index into the obligation store; -1 for the root
};

struct Pdr {
  Framework& fw;
  Engine& self;
  const TransitionSystem& ts;
  const std::string& prop;
  Session& s;

  std::vector<std::string> state;  // pre-referenced vars, flag excluded
  std::vector<std::string> prestate_names;
  std::vector<std::vector<Cube>> frames;  // frames[i]: cubes blocked at exactly level i
  int K = 1;

  std::vector<Obligation> store;
  std::set<std::pair<int, size_t>> queue;  // (level, store index)
  size_t next_order = 0;

  Pdr(Framework& fw_, Engine& self_, const TransitionSystem& ts_, const std::string& prop_,
      Session& s_)
      : fw(fw_), self(self_), ts(ts_), prop(prop_), s(s_) {
    for (const std::string& v : ts.state_vars())
      if (v != ts.init_flag) state.push_back(v);
    prestate_names.push_back(indexed_name(ts.init_flag, 0));
    s.declare(prestate_names.back(), Sort::Bool);
    for (const std::string& v : state) {
      prestate_names.push_back(indexed_name(v, -1));
      s.declare(prestate_names.back(), ts.sort_of(v));
    }
  }

  // --- literal/term plumbing ---

  TermRef lit_pre(const Lit& l) const {
    if (l.is_flag) {
      TermRef f = mk_var(ts.init_flag, Sort::Bool);
      return l.val.as_bool() ? f : mk_not(f);
    }
    TermRef v = mk_var(l.var, ts.sort_of(l.var), StepTag::Prev);
    TermRef c = mk_const(l.val);
    switch (l.rel) {
      case Lit::Rel::Eq: return mk_eq(v, c);
      case Lit::Rel::Le: return mk_le(v, c);
      case Lit::Rel::Ge: return mk_ge(v, c);
    }
    return {};
  }

  TermRef lit_pre_neg(const Lit& l) const {
    if (l.is_flag) {
      TermRef f = mk_var(ts.init_flag, Sort::Bool);
      return l.val.as_bool() ? mk_not(f) : f;
    }
    TermRef v = mk_var(l.var, ts.sort_of(l.var), StepTag::Prev);
    TermRef c = mk_const(l.val);
    switch (l.rel) {
      case Lit::Rel::Eq: return mk_neq(v, c);
      case Lit::Rel::Le: return mk_gt(v, c);
      case Lit::Rel::Ge: return mk_lt(v, c);
    }
    return {};
  }

  // The literal over the step's computed values; the successor's flag is
  // always false, so flag literals degenerate to constants.
  TermRef lit_post(const Lit& l) const {
    if (l.is_flag) return l.val.as_bool() ? mk_false() : mk_true();
    TermRef v = mk_var(l.var, ts.sort_of(l.var), StepTag::Curr);
    TermRef c = mk_const(l.val);
    switch (l.rel) {
      case Lit::Rel::Eq: return mk_eq(v, c);
      case Lit::Rel::Le: return mk_le(v, c);
      case Lit::Rel::Ge: return mk_ge(v, c);
    }
    return {};
  }

  // clause(c) = the negation of the cube, over the prestate.
  TermRef clause_of(const Cube& c) const {
    std::vector<TermRef> parts;
    for (const Lit& l : c) parts.push_back(lit_pre_neg(l));
    return mk_or(std::move(parts));
  }

  bool cube_is_initial(const Cube& c) const {
    for (const Lit& l : c)
      if (l.is_flag) return l.val.as_bool();
    return true;  // no flag literal constrains it away from init
  }

  Cube cube_from_model(const std::map<std::string, Value>& m) const {
    Cube c;
    c.push_back({ts.init_flag, true, Lit::Rel::Eq, m.at(indexed_name(ts.init_flag, 0))});
    for (const std::string& v : state)
      c.push_back({v, false, Lit::Rel::Eq, m.at(indexed_name(v, -1))});
    return c;
  }

  // --- queries (each one is a scheduling checkpoint) ---

  CheckResult query(std::vector<Assumption> assume, const std::vector<std::string>& want = {}) {
    fw.checkpoint(self);
    CheckResult r = s.check(assume, want);
    fw.note_checks(self, 1);
    return r;
  }

  void push_frame_assumptions(int level, std::vector<Assumption>& out) const {
    if (level == 0) {
      out.push_back({"f-init", mk_var(ts.init_flag, Sort::Bool), 0});
      return;
    }
    int n = 0;
    for (int j = level; j <= K; j++)
      for (const Cube& c : frames[j])
        out.push_back({"f" + std::to_string(n++), clause_of(c), 0});
  }

  // F_{level-1} and not-c and T and c': the relative induction query.
  CheckResult relative(const Cube& c, int level, bool want_predecessor) {
    std::vector<Assumption> assume;
    push_frame_assumptions(level - 1, assume);
    assume.push_back({"not-c", clause_of(c), 0});
    int n = 0;
    for (const Lit& l : c) {
      if (l.is_flag) continue;  // successor flag is constant false
      assume.push_back({"l" + std::to_string(n++), lit_post(l), 0});
    }
    return query(std::move(assume), want_predecessor ? prestate_names
                                                     : std::vector<std::string>{});
  }

  // --- generalization ---

  Cube generalize(Cube c, int level) {
    // Pass 1: keep only the successor literals the unsat core needed. The
    // core refers to the l<i> labels handed to `relative`.
    CheckResult r = relative(c, level, false);
    if (r.unsat() && !r.core.empty()) {
      Cube kept;
      int n = 0;
      for (const Lit& l : c) {
        if (l.is_flag) {
          kept.push_back(l);  // the flag literal keeps the cube off init
          continue;
        }
        if (r.core.count("l" + std::to_string(n++))) kept.push_back(l);
      }
      if (!kept.empty()) c = std::move(kept);
    }
    // Pass 2: weaken numeric equalities into half-bounds where blocking
    // still succeeds.
    for (size_t i = 0; i < c.size(); i++) {
      if (c[i].is_flag || c[i].rel != Lit::Rel::Eq || c[i].val.is_bool()) continue;
      for (Lit::Rel rel : {Lit::Rel::Le, Lit::Rel::Ge}) {
        Cube trial = c;
        trial[i].rel = rel;
        if (relative(trial, level, false).unsat()) {
          c = std::move(trial);
          break;
        }
      }
    }
    // Pass 3: plain literal dropping.
    for (size_t i = 0; i < c.size();) {
      if (c[i].is_flag || c.size() == 1) {
        i++;
        continue;
      }
      Cube trial = c;
      trial.erase(trial.begin() + i);
      if (relative(trial, level, false).unsat())
        c = std::move(trial);
      else
        i++;
    }
    return c;
  }

  void add_blocked(const Cube& c, int level) {
    for (const Cube& existing : frames[level])
      if (same_cube(existing, c)) return;
    frames[level].push_back(c);
  }

  static bool same_cube(const Cube& a, const Cube& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); i++)
      if (a[i].var != b[i].var || a[i].rel != b[i].rel || a[i].val != b[i].val) return false;
    return true;
  }

  // --- results ---

  enum class Outcome { Valid, Falsified, Unknown };

  struct Result {
    Outcome outcome = Outcome::Unknown;
    std::vector<TermRef> invariant_clauses;
    Trace trace;
  };

  // The obligation chain is a sequence of concrete states from an initial one
  // to the root; replaying it as a bounded unrolling of the same length fills
  // in every non-state variable consistently.
  Result concretize(int chain_len) {
    Result res;
    Session::Scope scope(s);
    assert_init_flag(s, ts, 0, true);
    for (int t = 1; t < chain_len; t++) {
      assert_equations(s, ts, t);
      assert_assertions(s, ts, t);
      assert_init_flag(s, ts, t, false);
    }
    std::vector<std::string> names = trace_query_names(s, ts, chain_len - 1);
    CheckResult r = query({{"bad", mk_not(*ts.property(prop)), chain_len - 1}}, names);
    if (!r.sat())
      throw ProtocolError("pdr: a counterexample chain of length " +
                          std::to_string(chain_len) + " did not concretize");
    res.outcome = Outcome::Falsified;
    res.trace = trace_from_model(ts, r.model, chain_len - 1);
    return res;
  }

  int chain_length(int idx) const {
    int n = 0;
    for (int i = idx; i >= 0; i = store[i].parent) n++;
    return n;
  }

  // Drains the obligation queue; nullopt means everything got blocked.
  std::optional<Result> drain_obligations() {
    while (!queue.empty()) {
      if (fw.resolved(prop)) return Result{};  // someone else settled it
      auto [level, idx] = *queue.begin();
      queue.erase(queue.begin());
      const Cube cube = store[idx].cube;

      if (level == 0 || cube_is_initial(cube)) return concretize(chain_length(idx));

      CheckResult r = relative(cube, level, true);
      if (r.unknown()) return Result{};
      if (r.unsat()) {
        Cube g = generalize(cube, level);
        int j = level;
        while (j < K && relative(g, j + 1, false).unsat()) j++;
        add_blocked(g, j);
        if (j < K) queue.insert({j + 1, idx});
        continue;
      }
      // A concrete predecessor: chase it at the level below, and keep the
      // parent outstanding.
      store.push_back({cube_from_model(r.model), level - 1, next_order++, idx});
      queue.insert({level - 1, store.size() - 1});
      queue.insert({level, idx});
    }
    return std::nullopt;
  }

  Result run() {
    // Do initial states already violate the property?
    {
      std::vector<std::string> names = trace_query_names(s, ts, 0);
      CheckResult r = query({{"f-init", mk_var(ts.init_flag, Sort::Bool), 0},
                             {"bad", mk_not(*ts.property(prop)), 0}},
                            names);
      if (r.unknown()) return {};
      if (r.sat()) {
        Result res;
        res.outcome = Outcome::Falsified;
        res.trace = trace_from_model(ts, r.model, 0);
        return res;
      }
    }

    frames.assign(2, {});  // level 0 is the init predicate, level 1 starts empty
    for (;;) {
      if (fw.resolved(prop)) return {};
      // Fish a bad prestate out of the top frame.
      std::vector<Assumption> assume;
      push_frame_assumptions(K, assume);
      assume.push_back({"bad", mk_not(*ts.property(prop)), 0});
      CheckResult r = query(std::move(assume), prestate_names);
      if (r.unknown()) return {};
      if (r.sat()) {
        store.push_back({cube_from_model(r.model), K, next_order++, -1});
        queue.insert({K, static_cast<int>(store.size()) - 1});
        if (auto res = drain_obligations()) return *res;
        continue;
      }

      // Top frame is clean: open the next one and push clauses forward.
      K++;
      frames.push_back({});
      for (int i = 1; i < K; i++) {
        std::vector<Cube> kept;
        for (const Cube& c : frames[i]) {
          std::vector<Assumption> push_q;
          push_frame_assumptions(i, push_q);
          int n = 0;
          for (const Lit& l : c) {
            if (l.is_flag) continue;
            push_q.push_back({"l" + std::to_string(n++), lit_post(l), 0});
          }
          CheckResult pr = query(std::move(push_q));
          if (pr.unknown()) return {};
          if (pr.unsat())
            frames[i + 1].push_back(c);
          else
            kept.push_back(c);
        }
        frames[i] = std::move(kept);
        if (frames[i].empty()) {
          Result res;
          res.outcome = Outcome::Valid;
          for (int j = i + 1; j <= K; j++)
            for (const Cube& c : frames[j]) res.invariant_clauses.push_back(clause_of(c));
          return res;
        }
      }
    }
  }
};

}  // namespace

void PdrEngine::run(Framework& fw) {
  if (fw.resolved(property_)) {
    fw.broadcast(*this, {Message::Kind::Done, name()});
    return;
  }
  const TransitionSystem& ts = fw.ts();
  SessionPtr session = fw.make_session(*this, property_);
  assert_equations(*session, ts, 0);
  assert_assertions(*session, ts, 0);

  Pdr pdr(fw, *this, ts, property_, *session);
  Pdr::Result res = pdr.run();

  switch (res.outcome) {
    case Pdr::Outcome::Valid: {
      if (!res.invariant_clauses.empty()) {
        Message inv;
        inv.kind = Message::Kind::Invariants;
        inv.engine = name();
        inv.invariants = res.invariant_clauses;
        fw.broadcast(*this, inv);
      }
      Message m;
      m.kind = Message::Kind::Valid;
      m.engine = name();
      m.property = property_;
      m.k = 1;
      m.invariants = res.invariant_clauses;
      fw.broadcast(*this, m);
      break;
    }
    case Pdr::Outcome::Falsified: {
      Message m;
      m.kind = Message::Kind::Falsified;
      m.engine = name();
      m.property = property_;
      m.trace = std::move(res.trace);
      fw.broadcast(*this, m);
      break;
    }
    case Pdr::Outcome::Unknown:
      break;
  }
  fw.broadcast(*this, {Message::Kind::Done, name()});
}

}  // namespace minikind
