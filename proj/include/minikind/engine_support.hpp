#pragma once

#include <map>
#include <string>
#include <vector>

#include "minikind/solver.hpp"
#include "minikind/trace.hpp"
#include "minikind/transition_system.hpp"

namespace minikind {

// Building blocks the engines share for unrolling a system into a session.
// Each engine composes these differently: BMC pins the init flag per step,
// k-induction leaves it free at the window start, PDR leaves it free entirely
// and constrains it through cubes.

// Assert every equation (lhs = rhs) instantiated at `step`.
void assert_equations(Session& s, const TransitionSystem& ts, int step);

// Assert every model-level assertion at `step`.
void assert_assertions(Session& s, const TransitionSystem& ts, int step);

// Pin the init flag at `step` to `value`.
void assert_init_flag(Session& s, const TransitionSystem& ts, int step, bool value);

// One fully pinned execution step: equations, assertions, and the init flag
// true at step 0, false afterwards.
void assert_step(Session& s, const TransitionSystem& ts, int step);

// Declare (idempotently) and list every name a counterexample trace needs:
// all table variables at steps 0..depth plus the prestate of every
// pre-referenced variable. Sliced-away inputs never occur in assertions, so
// the declarations matter.
std::vector<std::string> trace_query_names(Session& s, const TransitionSystem& ts, int depth);

// Rebuild a Trace from the model of a satisfiable depth-`depth` check whose
// want_values came from trace_query_names.
Trace trace_from_model(const TransitionSystem& ts, const std::map<std::string, Value>& model,
                       int depth);

}  // namespace minikind
