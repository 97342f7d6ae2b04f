#include "minikind/trace.hpp"

namespace minikind {

std::string replay_trace(const TransitionSystem& ts, const Trace& trace,
                         const std::string& property) {
  if (trace.steps.empty()) return "trace is empty";
  const TermRef* prop = ts.property(property);
  if (!prop) return "unknown property '" + property + "'";

  for (size_t t = 0; t < trace.steps.size(); t++) {
    const auto& here = trace.steps[t];
    Valuation val = [&](const std::string& name, StepTag tag) -> std::optional<Value> {
      const std::map<std::string, Value>& frame =
          tag == StepTag::Curr ? here : (t > 0 ? trace.steps[t - 1] : trace.prestate);
      auto it = frame.find(name);
      if (it == frame.end()) return std::nullopt;
      return it->second;
    };

    for (const auto& [name, sort] : ts.vars) {
      if (!here.count(name))
        return "step " + std::to_string(t) + " has no value for '" + name + "'";
    }
    // %init must be true exactly at the first step
    if (here.at(ts.init_flag) != Value(t == 0))
      return "step " + std::to_string(t) + " has a wrong " + ts.init_flag + " value";

    try {
      for (const auto& eq : ts.equations) {
        Value got = eval(eq.rhs, val);
        if (got != here.at(eq.lhs))
          return "equation '" + eq.id + "' does not hold at step " + std::to_string(t) + " (" +
                 got.str() + " vs " + here.at(eq.lhs).str() + ")";
      }
      for (const auto& a : ts.assertions) {
        if (!eval(a, val).as_bool())
          return "an assertion is violated at step " + std::to_string(t);
      }
      // A property may genuinely be false before the final step (a minimal
      // trace just never is); only the final step is part of the contract.
      if (t + 1 == trace.steps.size() && eval(*prop, val).as_bool())
        return "property '" + property + "' still holds at the final step";
    } catch (const MissingVar& e) {
      return "step " + std::to_string(t) + " reads an absent value: " + e.what();
    }
  }
  return "";
}

}  // namespace minikind
