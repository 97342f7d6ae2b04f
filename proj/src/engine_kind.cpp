#include "minikind/engine_kind.hpp"

#include <algorithm>

#include "minikind/engine_support.hpp"

namespace minikind {

namespace {

// The induction window is an arbitrary stretch of execution: the init flag at
// the window's first step is left free (the window may or may not start at
// step zero of a run), and is pinned false afterwards, since only an absolute
// first step can be initial.
void assert_window_step(Session& s, const TransitionSystem& ts, int step) {
  assert_equations(s, ts, step);
  assert_assertions(s, ts, step);
  if (step > 0) assert_init_flag(s, ts, step, false);
}

}  // namespace

void KindEngine::run(Framework& fw) {
  const TransitionSystem& ts = fw.ts();
  const RunConfig& cfg = fw.config();
  SessionPtr session = fw.make_session(*this, "");

  std::vector<std::string> open;
  for (const auto& [name, term] : ts.properties) open.push_back(name);

  std::vector<TermRef> invariants;  // received and asserted, never retracted
  int window_top = 0;               // highest step asserted so far
  assert_window_step(*session, ts, 0);

  // Invariant producers this run can still hear from: one invgen engine and
  // one PDR sub-engine per property.
  int sources_left = (cfg.enable_invgen ? 1 : 0) +
                     (cfg.enable_pdr ? static_cast<int>(ts.properties.size()) : 0);

  // Pulls newly proved invariants off the bus and asserts them at every
  // window step; returns true when anything arrived.
  auto absorb_inbox = [&]() {
    bool fresh = false;
    for (Message& m : fw.take_inbox(*this)) {
      if (m.kind == Message::Kind::Invariants) {
        for (TermRef& inv : m.invariants) {
          for (int t = 0; t <= window_top; t++) session->assert_at(inv, t);
          invariants.push_back(std::move(inv));
          fresh = true;
        }
      } else if (m.kind == Message::Kind::Done &&
                 (m.engine == "invgen" || m.engine == "pdr")) {
        sources_left--;
      }
    }
    return fresh;
  };

  auto prune_resolved = [&] {
    open.erase(std::remove_if(open.begin(), open.end(),
                              [&](const std::string& p) { return fw.resolved(p); }),
               open.end());
  };

  // One inductive-step query: does p holding at steps 0..k-1 force p at k?
  auto step_holds = [&](const std::string& prop, int k) {
    const TermRef& p = *ts.property(prop);
    std::vector<Assumption> assume;
    for (int i = 0; i < k; i++) assume.push_back({"p" + std::to_string(i), p, i});
    assume.push_back({"bad", mk_not(p), k});
    CheckResult r = session->check(assume);
    fw.note_checks(*this, 1);
    return r.unsat();
  };

  auto announce = [&](const std::string& prop, int k) {
    Message m;
    m.kind = Message::Kind::InductiveOnly;
    m.engine = name();
    m.property = prop;
    m.k = k;
    m.invariants = invariants;
    fw.broadcast(*this, m);
    open.erase(std::find(open.begin(), open.end(), prop));
  };

  for (int k = 1; k <= cfg.kind_max_k && !open.empty(); k++) {
    for (int t = window_top + 1; t <= k; t++) assert_window_step(*session, ts, t);
    for (const TermRef& inv : invariants)
      for (int t = window_top + 1; t <= k; t++) session->assert_at(inv, t);
    window_top = k;

    bool progress = true;
    while (progress && !open.empty()) {
      progress = false;
      for (const std::string& prop : std::vector<std::string>(open)) {
        fw.checkpoint(*this);
        if (fw.resolved(prop)) continue;
        if (step_holds(prop, k)) {
          announce(prop, k);
          progress = true;
        }
      }
      prune_resolved();
      // Fresh invariants may unlock properties that just failed at this k.
      if (absorb_inbox()) progress = true;
    }
  }

  // The window is exhausted, but late invariants can still close the rest:
  // stay subscribed while any producer is alive.
  while (!open.empty() && sources_left > 0) {
    fw.checkpoint(*this);
    prune_resolved();
    if (!absorb_inbox()) continue;
    for (int k = 1; k <= cfg.kind_max_k && !open.empty(); k++) {
      for (const std::string& prop : std::vector<std::string>(open)) {
        fw.checkpoint(*this);
        if (fw.resolved(prop)) continue;
        if (step_holds(prop, k)) announce(prop, k);
      }
      prune_resolved();
    }
  }

  fw.broadcast(*this, {Message::Kind::Done, name()});
}

}  // namespace minikind
