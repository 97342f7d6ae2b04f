#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "minikind/value.hpp"

namespace minikind {

enum class TermKind {
  Const,
  Var,
  Not,
  And,   // n-ary
  Or,    // n-ary
  Xor,   // binary
  Implies,
  Ite,
  Eq,
  Lt,
  Le,
  Gt,
  Ge,
  Add,
  Sub,
  Neg,
  Mul,
  Div,  // integer Euclidean division, constant divisor
  Mod,
};

// A variable occurrence is either the current-step value or the previous-step
// value (the result of translating `pre`).
enum class StepTag { Curr, Prev };

class TermNode;
using TermRef = std::shared_ptr<const TermNode>;

class TermNode {
 public:
  TermKind kind;
  Sort sort;
  Value val;         // Const only
  std::string var;   // Var only
  StepTag tag = StepTag::Curr;
  std::vector<TermRef> kids;
  size_t hash = 0;

  bool is_const() const { return kind == TermKind::Const; }
  bool is_var() const { return kind == TermKind::Var; }
  bool is_true() const { return is_const() && sort == Sort::Bool && val.as_bool(); }
  bool is_false() const { return is_const() && sort == Sort::Bool && !val.as_bool(); }
};

// --- smart constructors -----------------------------------------------------
// Normalization is deliberately light: constant folding of fully-constant
// nodes, and/or flattening with unit/absorbing element handling, and
// double-negation elimination. Nothing else rewrites.

TermRef mk_true();
TermRef mk_false();
TermRef mk_bool(bool b);
TermRef mk_int(const mpz_class& z);
TermRef mk_int(long n);
TermRef mk_real(const mpq_class& q);
TermRef mk_const(const Value& v);
TermRef mk_var(const std::string& name, Sort sort, StepTag tag = StepTag::Curr);
TermRef mk_prev(const std::string& name, Sort sort);

TermRef mk_not(TermRef a);
TermRef mk_and(std::vector<TermRef> kids);
TermRef mk_and(TermRef a, TermRef b);
TermRef mk_or(std::vector<TermRef> kids);
TermRef mk_or(TermRef a, TermRef b);
TermRef mk_xor(TermRef a, TermRef b);
TermRef mk_implies(TermRef a, TermRef b);
TermRef mk_ite(TermRef c, TermRef t, TermRef e);
TermRef mk_eq(TermRef a, TermRef b);
TermRef mk_neq(TermRef a, TermRef b);
TermRef mk_lt(TermRef a, TermRef b);
TermRef mk_le(TermRef a, TermRef b);
TermRef mk_gt(TermRef a, TermRef b);
TermRef mk_ge(TermRef a, TermRef b);
TermRef mk_add(TermRef a, TermRef b);
TermRef mk_sub(TermRef a, TermRef b);
TermRef mk_neg(TermRef a);
TermRef mk_mul(TermRef a, TermRef b);
TermRef mk_div(TermRef a, TermRef b);
TermRef mk_mod(TermRef a, TermRef b);

// --- structure --------------------------------------------------------------

bool term_eq(const TermRef& a, const TermRef& b);

// Deterministic total order (used to keep term sets in stable order).
int term_cmp(const TermRef& a, const TermRef& b);

struct TermHash {
  size_t operator()(const TermRef& t) const { return t->hash; }
};
struct TermEq {
  bool operator()(const TermRef& a, const TermRef& b) const { return term_eq(a, b); }
};
struct TermLess {
  bool operator()(const TermRef& a, const TermRef& b) const { return term_cmp(a, b) < 0; }
};

// Free variables in first-occurrence traversal order.
std::vector<std::pair<std::string, StepTag>> free_vars(const TermRef& t);
bool mentions_prev(const TermRef& t);

// All numeric constants occurring in the term (traversal order, de-duplicated).
void collect_constants(const TermRef& t, std::vector<Value>& out);

// --- evaluation -------------------------------------------------------------

// Lookup of a variable's value. Returning nullopt raises MissingVar, but only
// when the value is actually needed: and/or/ite/implies evaluate lazily, so
// e.g. ite(%init, a, b) with %init=true never reads b.
using Valuation = std::function<std::optional<Value>(const std::string&, StepTag)>;

Value eval(const TermRef& t, const Valuation& env);

// --- SMT-LIB2 serialization -------------------------------------------------

// Maps a (variable, step tag) occurrence to the SMT symbol to print.
using Namer = std::function<std::string(const std::string&, StepTag)>;

void to_smtlib(const TermRef& t, const Namer& namer, std::string& out);
std::string to_smtlib(const TermRef& t, const Namer& namer);

// Standard unrolling namer: curr -> v$i, prev -> v$(i-1).
Namer step_namer(int i);
std::string indexed_name(const std::string& v, int i);

// Serialization of a term instantiated at step i.
std::string smt_at(const TermRef& t, int i);

}  // namespace minikind
