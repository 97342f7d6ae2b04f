#pragma once

#include <map>
#include <set>
#include <vector>

#include "minikind/term.hpp"

namespace minikind {

struct Equation {
  std::string id;    // stable identifier; equals lhs
  std::string lhs;   // flat variable name
  TermRef rhs;       // may contain prev(v) references
  SourceSpan span;
};

struct Provenance {
  SourceSpan span;
  std::string dotted;  // original dotted path, e.g. main.sub1.x
};

// Flattened symbolic model. The distinguished %init flag is true exactly at
// step 0 and is driven by the encoding, not by an equation.
struct TransitionSystem {
  std::string source_file;
  std::vector<std::pair<std::string, Sort>> vars;  // ordered, %init first
  std::string init_flag = "%init";
  std::vector<std::string> inputs;  // free (undefined) variables
  std::set<std::string> unused_inputs;
  std::vector<Equation> equations;
  std::vector<TermRef> assertions;
  std::vector<std::pair<std::string, TermRef>> properties;
  std::map<std::string, Provenance> provenance;

  bool has_var(const std::string& name) const;
  Sort sort_of(const std::string& name) const;  // throws ProtocolError if unknown
  bool is_input(const std::string& name) const;
  const Equation* equation_for(const std::string& lhs) const;
  const TermRef* property(const std::string& name) const;

  // Variables carrying state between steps: everything referenced through
  // `pre` somewhere, plus the init flag.
  std::vector<std::string> state_vars() const;

  std::string smt_logic() const;  // QF_LIA, QF_LRA or QF_LIRA
};

std::string dump_ts_json(const TransitionSystem& ts);

}  // namespace minikind
