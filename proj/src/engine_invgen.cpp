#include "minikind/engine_invgen.hpp"

#include <algorithm>
#include <set>

#include "minikind/engine_support.hpp"

namespace minikind {

namespace {
constexpr int kPairCap = 2000;  // per pair-template instance budget
constexpr int kMaxK = 3;        // deep induction is engine_kind's job

bool is_numeric(Sort s) { return s != Sort::Bool; }
}  // namespace

std::vector<Candidate> generate_candidates(const TransitionSystem& ts,
                                           const std::vector<TermRef>& seeds) {
  std::vector<Candidate> out;
  std::set<TermRef, TermLess> seen;
  auto add = [&](const TermRef& t) {
    if (seen.insert(t).second) out.push_back({t});
  };

  for (const TermRef& s : seeds)
    if (s->sort == Sort::Bool) add(s);

  // Bool streams and their negations.
  std::vector<std::string> bools;
  for (const Equation& eq : ts.equations)
    if (ts.sort_of(eq.lhs) == Sort::Bool) bools.push_back(eq.lhs);
  for (const std::string& b : bools) {
    add(mk_var(b, Sort::Bool));
    add(mk_not(mk_var(b, Sort::Bool)));
  }

  // Pairwise implications between bool streams.
  std::vector<std::string> by_name = bools;
  std::sort(by_name.begin(), by_name.end());
  int pairs = 0;
  for (const std::string& a : by_name)
    for (const std::string& b : by_name) {
      if (a == b || pairs >= kPairCap) continue;
      pairs++;
      add(mk_implies(mk_var(a, Sort::Bool), mk_var(b, Sort::Bool)));
    }

  // Bounds against every constant appearing in the model's text.
  std::vector<Value> consts;
  for (const Equation& eq : ts.equations) collect_constants(eq.rhs, consts);
  for (const TermRef& a : ts.assertions) collect_constants(a, consts);
  for (const auto& [name, p] : ts.properties) collect_constants(p, consts);
  std::vector<Value> uniq;
  for (const Value& c : consts)
    if (std::find(uniq.begin(), uniq.end(), c) == uniq.end()) uniq.push_back(c);

  std::vector<std::pair<std::string, Sort>> nums;
  for (const auto& [name, sort] : ts.vars)
    if (is_numeric(sort) && name != ts.init_flag) nums.push_back({name, sort});
  for (const auto& [x, sort] : nums)
    for (const Value& c : uniq) {
      if (c.sort() != sort) continue;
      add(mk_le(mk_var(x, sort), mk_const(c)));
      add(mk_ge(mk_var(x, sort), mk_const(c)));
    }

  // Variable-to-variable orderings.
  std::vector<std::pair<std::string, Sort>> nums_by_name = nums;
  std::sort(nums_by_name.begin(), nums_by_name.end());
  pairs = 0;
  for (const auto& [x, sx] : nums_by_name)
    for (const auto& [y, sy] : nums_by_name) {
      if (x == y || sx != sy || pairs >= kPairCap) continue;
      pairs++;
      add(mk_le(mk_var(x, sx), mk_var(y, sy)));
    }

  return out;
}

namespace {

// The base/step prune loop shared by the advice phase and the template phase.
// One candidate set shrinks under counterexamples until simultaneous
// induction holds; survivors are broadcast and kept for strengthening later
// sets.
struct Houdini {
  Framework& fw;
  Engine& self;
  const TransitionSystem& ts;
  Session& s;
  std::vector<TermRef> proved;  // everything proved so far, any phase
  int eq_top = -1;              // highest step with equations asserted

  void ensure_equations(int top) {
    for (int t = eq_top + 1; t <= top; t++) assert_equations(s, ts, t);
    eq_top = std::max(eq_top, top);
  }

  // Names whose values let us evaluate any candidate at step t, including
  // `pre` references. Declared on the way out: an input no equation mentions
  // never reaches the solver otherwise, and get-value rejects unknown names.
  std::vector<std::string> eval_names(int t) {
    std::vector<std::string> names;
    auto want = [&](const std::string& v, int at) {
      std::string n = indexed_name(v, at);
      s.declare(n, ts.sort_of(v));
      names.push_back(std::move(n));
    };
    for (const auto& [v, sort] : ts.vars) want(v, t);
    if (t > 0)
      for (const auto& [v, sort] : ts.vars) want(v, t - 1);
    else
      for (const std::string& v : ts.state_vars())
        if (v != ts.init_flag) want(v, -1);
    return names;
  }

  Valuation model_valuation(const std::map<std::string, Value>& model, int t) const {
    return [&model, t](const std::string& v, StepTag tag) -> std::optional<Value> {
      auto it = model.find(indexed_name(v, tag == StepTag::Curr ? t : t - 1));
      if (it == model.end()) return std::nullopt;
      return it->second;
    };
  }

  static TermRef conjunction(const std::vector<Candidate*>& work) {
    std::vector<TermRef> terms;
    for (const Candidate* c : work) terms.push_back(c->term);
    return mk_and(std::move(terms));
  }

  // Evaluate every working candidate under the model at step t, recording
  // toppled ones. Returns how many fell (at least one must, or the query that
  // produced the model was wrong).
  int topple(std::vector<Candidate*>& work, const std::map<std::string, Value>& model, int t,
             Candidate::Status mark) {
    Valuation env = model_valuation(model, t);
    int fell = 0;
    for (auto it = work.begin(); it != work.end();) {
      Candidate& c = **it;
      bool holds;
      try {
        holds = eval(c.term, env).as_bool();
      } catch (const MissingVar&) {
        // A stale advice term can reference state this model does not carry;
        // unverifiable means unusable.
        holds = false;
      }
      if (holds) {
        ++it;
        continue;
      }
      c.status = mark;
      c.witness = model;
      c.witness_step = t;
      it = work.erase(it);
      fell++;
    }
    if (fell == 0)
      throw ProtocolError("invariant pruning made no progress on a satisfiable query");
    return fell;
  }

  // Drop candidates violated within the first k steps of real (initialized)
  // executions. Those marks are final: a concrete run breaks the candidate.
  bool base(std::vector<Candidate*>& work, int k) {
    ensure_equations(k - 1);
    Session::Scope scope(s);
    assert_init_flag(s, ts, 0, true);
    for (int t = 1; t < k; t++) assert_init_flag(s, ts, t, false);
    for (int t = 0; t < k; t++) assert_assertions(s, ts, t);
    for (int t = 0; t < k && !work.empty(); t++) {
      for (;;) {
        fw.checkpoint(self);
        CheckResult r = s.check({{"viol", mk_not(conjunction(work)), t}}, eval_names(t));
        fw.note_checks(self, 1);
        if (r.unsat()) break;
        if (r.unknown()) return false;
        topple(work, r.model, t, Candidate::Status::Falsified);
        if (work.empty()) break;
      }
    }
    return true;
  }

  // Mutual induction at window length k: assume the whole set for k steps,
  // demand it at step k. Candidates that fall here are only out for this k;
  // they rejoin at the next window length.
  bool step(std::vector<Candidate*>& work, int k) {
    ensure_equations(k);
    Session::Scope scope(s);
    for (int t = 1; t <= k; t++) assert_init_flag(s, ts, t, false);
    for (int t = 0; t <= k; t++) assert_assertions(s, ts, t);
    for (const TermRef& inv : proved)
      for (int t = 0; t <= k; t++) s.assert_at(inv, t);
    while (!work.empty()) {
      fw.checkpoint(self);
      std::vector<Assumption> assume;
      TermRef conj = conjunction(work);
      for (int i = 0; i < k; i++) assume.push_back({"c" + std::to_string(i), conj, i});
      assume.push_back({"viol", mk_not(conj), k});
      CheckResult r = s.check(assume, eval_names(k));
      fw.note_checks(self, 1);
      if (r.unsat()) return true;
      if (r.unknown()) return false;
      topple(work, r.model, k, Candidate::Status::Unknown);
    }
    return true;
  }

  // Full schedule over one candidate set. Returns false if the solver gave up
  // (the engine then retires rather than broadcast guesses).
  bool prune(std::vector<Candidate>& cands) {
    for (int k = 1; k <= kMaxK; k++) {
      std::vector<Candidate*> work;
      for (Candidate& c : cands)
        if (c.status == Candidate::Status::Unknown) work.push_back(&c);
      if (work.empty()) return true;
      if (!base(work, k)) return false;
      if (work.empty()) continue;
      if (!step(work, k)) return false;
      if (work.empty()) continue;
      std::vector<TermRef> fresh;
      for (Candidate* c : work) {
        c->status = Candidate::Status::Proved;
        fresh.push_back(c->term);
        proved.push_back(c->term);
      }
      Message m;
      m.kind = Message::Kind::Invariants;
      m.engine = self.name();
      m.invariants = std::move(fresh);
      fw.broadcast(self, m);
    }
    return true;
  }
};

}  // namespace

void InvgenEngine::run(Framework& fw) {
  const TransitionSystem& ts = fw.ts();
  SessionPtr session = fw.make_session(*this, "");
  Houdini h{fw, *this, ts, *session};

  // Phase one: invariants suggested by a previous run. They are few and
  // usually survive immediately, which gets them onto the bus long before the
  // template sweep below finishes.
  std::set<TermRef, TermLess> tried;
  std::vector<Candidate> advice;
  for (const TermRef& seed : fw.config().advice_invariants)
    if (seed->sort == Sort::Bool && tried.insert(seed).second) advice.push_back({seed});
  if (!advice.empty() && !h.prune(advice)) {
    fw.broadcast(*this, {Message::Kind::Done, name()});
    return;
  }

  // Phase two: the full template menu, minus anything phase one settled.
  std::vector<Candidate> menu;
  for (Candidate& c : generate_candidates(ts))
    if (tried.insert(c.term).second) menu.push_back(std::move(c));
  h.prune(menu);

  fw.broadcast(*this, {Message::Kind::Done, name()});
}

}  // namespace minikind
