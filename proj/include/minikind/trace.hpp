#pragma once

#include <map>
#include <string>
#include <vector>

#include "minikind/term.hpp"
#include "minikind/transition_system.hpp"

namespace minikind {

// A finite run of the system, as reported with a falsified property. Each step
// holds a value for every variable in the system's table. `prestate` carries
// the values `pre` expressions read at step 0; for well-initialized models it
// stays empty and is never consulted.
struct Trace {
  std::vector<std::map<std::string, Value>> steps;
  std::map<std::string, Value> prestate;

  size_t length() const { return steps.size(); }
};

// Replays `trace` through the equation evaluator: every equation must hold at
// every step, every assertion must hold at every step, and `property` must be
// false exactly at the final step. Returns an empty string on success and a
// human-readable complaint otherwise.
std::string replay_trace(const TransitionSystem& ts, const Trace& trace,
                         const std::string& property);

}  // namespace minikind
