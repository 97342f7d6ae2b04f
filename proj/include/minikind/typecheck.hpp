#pragma once

#include <functional>
#include <optional>

#include "minikind/ast.hpp"

namespace minikind {

// Annotates every expression with its sort and enforces: unique names,
// complete single-assignment definitions, call arity/sorts, linearity,
// property pragma targets, no (mutual) node recursion, and no syntactic
// dependency cycle among equations except through `pre`.
TypedProgram typecheck(Program program);

// Checks one stand-alone expression against a flat variable table (used for
// advice entries). Node calls are rejected; `pre`/`->` only if allow_temporal.
Sort check_flat_expr(const ExprPtr& e,
                     const std::function<std::optional<Sort>(const std::string&)>& lookup,
                     bool allow_temporal);

// Constant folding used by the linearity check: returns the exact value of a
// fully-constant combinational expression, nullopt otherwise.
std::optional<Value> const_fold(const ExprPtr& e);

}  // namespace minikind
