#pragma once

#include <map>
#include <vector>

#include "minikind/framework.hpp"

namespace minikind {

// One template-instantiated invariant candidate moving through the prune
// loop. A falsified candidate keeps the model values that killed it, so the
// verdict can be re-checked by evaluation.
struct Candidate {
  TermRef term;
  enum class Status { Unknown, Falsified, Proved };
  Status status = Status::Unknown;
  std::map<std::string, Value> witness;  // variable values at the falsifying step
  int witness_step = -1;
};

// Instantiates the template menu over the system's variables and literals:
// bool stream b and its negation, pairwise implications between bool streams,
// x <= c / x >= c for every numeric variable against every harvested
// constant, and x <= y over same-sort variable pairs. `seeds` (previously
// proved invariants suggested from outside) come first, so they are tried
// before anything else. Pair templates are capped at 2000 instances each, in
// deterministic name order; structural duplicates are dropped.
std::vector<Candidate> generate_candidates(const TransitionSystem& ts,
                                           const std::vector<TermRef>& seeds = {});

// Candidate generation plus a base/step prune loop at small k: whatever
// survives simultaneous induction is proved and broadcast for the other
// engines to use.
class InvgenEngine : public Engine {
 public:
  InvgenEngine() : Engine("invgen") {}
  void run(Framework& fw) override;
};

}  // namespace minikind
