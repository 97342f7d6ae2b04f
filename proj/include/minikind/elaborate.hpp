#pragma once

#include "minikind/ast.hpp"
#include "minikind/transition_system.hpp"

namespace minikind {

// Program after node-call inlining: a single scope of flat-named variables.
// Main's own variables keep their bare names; each inlined instance of node f
// gets the prefix <caller-path>.f<k>. with a 1-based per-callee counter.
struct FlatNode {
  std::string file;
  std::vector<VarDecl> inputs;   // main's inputs, bare names
  std::vector<VarDecl> defined;  // everything with a defining equation
  std::vector<AstEquation> equations;
  std::vector<ExprPtr> assertions;
  std::vector<std::pair<std::string, SourceSpan>> properties;
  std::map<std::string, Provenance> provenance;
  std::map<std::string, Sort> sorts;
  std::set<std::string> unused_inputs;  // filled by slice
};

FlatNode inline_nodes(const TypedProgram& p);

// Cone of influence of properties and assertions, through both current and
// `pre` references. Inputs stay in the table; unused ones are flagged.
FlatNode slice(FlatNode fn);

// Dependency core of slice, exposed for tests: which defined variables are
// reachable from the given roots.
std::set<std::string> cone_of_influence(const FlatNode& fn, const std::set<std::string>& roots);

TransitionSystem to_transition_system(const FlatNode& fn);

TransitionSystem elaborate(const TypedProgram& p);

}  // namespace minikind
