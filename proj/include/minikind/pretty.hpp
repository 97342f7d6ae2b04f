#pragma once

#include <optional>

#include "minikind/ast.hpp"
#include "minikind/term.hpp"

namespace minikind {

// Source-shaped output that re-parses to a structurally identical AST.
std::string pretty(const Program& p);
std::string pretty_expr(const Expr& e);

// Renders a term in Lustre expression syntax over flat variable names, as
// used in advice files and reports. Returns nullopt when the term contains a
// real constant with no finite decimal form (such terms cannot round-trip
// through the expression grammar).
std::optional<std::string> term_to_lustre(const TermRef& t);

// Finite decimal expansion of q, if the denominator is of the form 2^a*5^b.
std::optional<std::string> decimal_of_rational(const mpq_class& q);

}  // namespace minikind
