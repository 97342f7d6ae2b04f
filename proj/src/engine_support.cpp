#include "minikind/engine_support.hpp"

namespace minikind {

void assert_equations(Session& s, const TransitionSystem& ts, int step) {
  for (const Equation& eq : ts.equations)
    s.assert_at(mk_eq(mk_var(eq.lhs, ts.sort_of(eq.lhs)), eq.rhs), step);
}

void assert_assertions(Session& s, const TransitionSystem& ts, int step) {
  for (const TermRef& a : ts.assertions) s.assert_at(a, step);
}

void assert_init_flag(Session& s, const TransitionSystem& ts, int step, bool value) {
  TermRef flag = mk_var(ts.init_flag, Sort::Bool);
  s.assert_at(value ? flag : mk_not(flag), step);
}

void assert_step(Session& s, const TransitionSystem& ts, int step) {
  assert_equations(s, ts, step);
  assert_assertions(s, ts, step);
  assert_init_flag(s, ts, step, step == 0);
}

std::vector<std::string> trace_query_names(Session& s, const TransitionSystem& ts, int depth) {
  std::vector<std::string> names;
  for (int t = 0; t <= depth; t++)
    for (const auto& [name, sort] : ts.vars) {
      std::string in = indexed_name(name, t);
      s.declare(in, sort);
      names.push_back(std::move(in));
    }
  for (const std::string& v : ts.state_vars()) {
    if (v == ts.init_flag) continue;
    std::string in = indexed_name(v, -1);
    s.declare(in, ts.sort_of(v));
    names.push_back(std::move(in));
  }
  return names;
}

Trace trace_from_model(const TransitionSystem& ts, const std::map<std::string, Value>& model,
                       int depth) {
  Trace trace;
  for (int t = 0; t <= depth; t++) {
    std::map<std::string, Value> step;
    for (const auto& [name, sort] : ts.vars) step[name] = model.at(indexed_name(name, t));
    trace.steps.push_back(std::move(step));
  }
  for (const std::string& v : ts.state_vars())
    if (v != ts.init_flag) trace.prestate[v] = model.at(indexed_name(v, -1));
  return trace;
}

}  // namespace minikind
