#include "minikind/term.hpp"

#include <unordered_set>

namespace minikind {

namespace {

size_t mix(size_t h, size_t x) {
  h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

TermRef make(TermKind k, Sort s, std::vector<TermRef> kids) {
  auto n = std::make_shared<TermNode>();
  n->kind = k;
  n->sort = s;
  n->kids = std::move(kids);
  size_t h = mix(static_cast<size_t>(k) * 31 + 7, static_cast<size_t>(s));
  for (const auto& c : n->kids) h = mix(h, c->hash);
  n->hash = h;
  return n;
}

void require_bool(const TermRef& t, const char* who) {
  if (t->sort != Sort::Bool)
    throw SortError(std::string(who) + ": expected bool operand, got " + sort_name(t->sort));
}

void require_numeric(const TermRef& t, const char* who) {
  if (t->sort == Sort::Bool)
    throw SortError(std::string(who) + ": expected numeric operand, got bool");
}

void require_same(const TermRef& a, const TermRef& b, const char* who) {
  if (a->sort != b->sort)
    throw SortError(std::string(who) + ": operand sorts differ (" + sort_name(a->sort) + " vs " +
                    sort_name(b->sort) + ")");
}

bool both_const(const TermRef& a, const TermRef& b) { return a->is_const() && b->is_const(); }

TermRef const_node(const Value& v) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Const;
  n->sort = v.sort();
  n->val = v;
  n->hash = mix(mix(1, static_cast<size_t>(n->sort)), v.hash());
  return n;
}

}  // namespace

TermRef mk_true() {
  static const TermRef t = const_node(Value(true));
  return t;
}
TermRef mk_false() {
  static const TermRef f = const_node(Value(false));
  return f;
}
TermRef mk_bool(bool b) { return b ? mk_true() : mk_false(); }
TermRef mk_int(const mpz_class& z) { return const_node(Value(z)); }
TermRef mk_int(long n) { return mk_int(mpz_class(n)); }
TermRef mk_real(const mpq_class& q) { return const_node(Value(q)); }
TermRef mk_const(const Value& v) { return const_node(v); }

TermRef mk_var(const std::string& name, Sort sort, StepTag tag) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Var;
  n->sort = sort;
  n->var = name;
  n->tag = tag;
  n->hash = mix(mix(mix(2, static_cast<size_t>(sort)), std::hash<std::string>{}(name)),
                tag == StepTag::Prev ? 17 : 3);
  return n;
}

TermRef mk_prev(const std::string& name, Sort sort) { return mk_var(name, sort, StepTag::Prev); }

TermRef mk_not(TermRef a) {
  require_bool(a, "not");
  if (a->is_const()) return mk_bool(!a->val.as_bool());
  if (a->kind == TermKind::Not) return a->kids[0];  // double negation
  return make(TermKind::Not, Sort::Bool, {std::move(a)});
}

static TermRef nary_bool(TermKind k, std::vector<TermRef> kids) {
  // Flatten same-operator children, drop the unit element, short-circuit on
  // the absorbing element.
  const bool is_and = (k == TermKind::And);
  std::vector<TermRef> flat;
  for (auto& t : kids) {
    require_bool(t, is_and ? "and" : "or");
    if (t->is_const()) {
      if (t->val.as_bool() == is_and) continue;  // unit
      return mk_bool(!is_and);                   // absorbing
    }
    if (t->kind == k) {
      flat.insert(flat.end(), t->kids.begin(), t->kids.end());
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (flat.empty()) return mk_bool(is_and);
  if (flat.size() == 1) return flat[0];
  return make(k, Sort::Bool, std::move(flat));
}

TermRef mk_and(std::vector<TermRef> kids) { return nary_bool(TermKind::And, std::move(kids)); }
TermRef mk_and(TermRef a, TermRef b) { return mk_and(std::vector<TermRef>{std::move(a), std::move(b)}); }
TermRef mk_or(std::vector<TermRef> kids) { return nary_bool(TermKind::Or, std::move(kids)); }
TermRef mk_or(TermRef a, TermRef b) { return mk_or(std::vector<TermRef>{std::move(a), std::move(b)}); }

TermRef mk_xor(TermRef a, TermRef b) {
  require_bool(a, "xor");
  require_bool(b, "xor");
  if (both_const(a, b)) return mk_bool(a->val.as_bool() != b->val.as_bool());
  return make(TermKind::Xor, Sort::Bool, {std::move(a), std::move(b)});
}

TermRef mk_implies(TermRef a, TermRef b) {
  require_bool(a, "=>");
  require_bool(b, "=>");
  if (a->is_const()) return a->val.as_bool() ? b : mk_true();
  if (b->is_const() && b->val.as_bool()) return mk_true();
  return make(TermKind::Implies, Sort::Bool, {std::move(a), std::move(b)});
}

TermRef mk_ite(TermRef c, TermRef t, TermRef e) {
  require_bool(c, "ite");
  require_same(t, e, "ite");
  if (c->is_const()) return c->val.as_bool() ? t : e;
  Sort s = t->sort;  // read before the moves; argument order is unspecified
  return make(TermKind::Ite, s, {std::move(c), std::move(t), std::move(e)});
}

static TermRef cmp_op(TermKind k, TermRef a, TermRef b, const char* who) {
  require_numeric(a, who);
  require_same(a, b, who);
  if (both_const(a, b)) {
    bool lt = a->val.less(b->val);
    bool eq = a->val == b->val;
    switch (k) {
      case TermKind::Lt: return mk_bool(lt);
      case TermKind::Le: return mk_bool(lt || eq);
      case TermKind::Gt: return mk_bool(!lt && !eq);
      case TermKind::Ge: return mk_bool(!lt);
      default: break;
    }
  }
  return make(k, Sort::Bool, {std::move(a), std::move(b)});
}

TermRef mk_eq(TermRef a, TermRef b) {
  require_same(a, b, "=");
  if (both_const(a, b)) return mk_bool(a->val == b->val);
  return make(TermKind::Eq, Sort::Bool, {std::move(a), std::move(b)});
}

TermRef mk_neq(TermRef a, TermRef b) { return mk_not(mk_eq(std::move(a), std::move(b))); }
TermRef mk_lt(TermRef a, TermRef b) { return cmp_op(TermKind::Lt, std::move(a), std::move(b), "<"); }
TermRef mk_le(TermRef a, TermRef b) { return cmp_op(TermKind::Le, std::move(a), std::move(b), "<="); }
TermRef mk_gt(TermRef a, TermRef b) { return cmp_op(TermKind::Gt, std::move(a), std::move(b), ">"); }
TermRef mk_ge(TermRef a, TermRef b) { return cmp_op(TermKind::Ge, std::move(a), std::move(b), ">="); }

static Value num_add(const Value& a, const Value& b) {
  if (a.is_int()) return Value(mpz_class(a.as_int() + b.as_int()));
  return Value(mpq_class(a.as_real() + b.as_real()));
}
static Value num_sub(const Value& a, const Value& b) {
  if (a.is_int()) return Value(mpz_class(a.as_int() - b.as_int()));
  return Value(mpq_class(a.as_real() - b.as_real()));
}
static Value num_mul(const Value& a, const Value& b) {
  if (a.is_int()) return Value(mpz_class(a.as_int() * b.as_int()));
  return Value(mpq_class(a.as_real() * b.as_real()));
}

TermRef mk_add(TermRef a, TermRef b) {
  require_numeric(a, "+");
  require_same(a, b, "+");
  if (both_const(a, b)) return mk_const(num_add(a->val, b->val));
  Sort s = a->sort;
  return make(TermKind::Add, s, {std::move(a), std::move(b)});
}

TermRef mk_sub(TermRef a, TermRef b) {
  require_numeric(a, "-");
  require_same(a, b, "-");
  if (both_const(a, b)) return mk_const(num_sub(a->val, b->val));
  Sort s = a->sort;
  return make(TermKind::Sub, s, {std::move(a), std::move(b)});
}

TermRef mk_neg(TermRef a) {
  require_numeric(a, "unary -");
  if (a->is_const()) {
    if (a->sort == Sort::Int) return mk_int(mpz_class(-a->val.as_int()));
    return mk_real(mpq_class(-a->val.as_real()));
  }
  if (a->kind == TermKind::Neg) return a->kids[0];
  Sort s = a->sort;
  return make(TermKind::Neg, s, {std::move(a)});
}

TermRef mk_mul(TermRef a, TermRef b) {
  require_numeric(a, "*");
  require_same(a, b, "*");
  if (both_const(a, b)) return mk_const(num_mul(a->val, b->val));
  if (!a->is_const() && !b->is_const())
    throw NonlinearError("nonlinear multiplication: neither operand is a constant");
  Sort s = a->sort;
  return make(TermKind::Mul, s, {std::move(a), std::move(b)});
}

static void check_divisor(const TermRef& b, const char* who) {
  if (b->sort != Sort::Int) throw SortError(std::string(who) + ": integer operands required");
  if (!b->is_const()) throw NonlinearError(std::string(who) + ": divisor must be a constant");
  if (b->val.as_int() == 0) throw NonlinearError(std::string(who) + ": division by zero");
}

TermRef mk_div(TermRef a, TermRef b) {
  if (a->sort != Sort::Int) throw SortError("div: integer operands required");
  check_divisor(b, "div");
  if (a->is_const()) return mk_int(euclid_div(a->val.as_int(), b->val.as_int()));
  return make(TermKind::Div, Sort::Int, {std::move(a), std::move(b)});
}

TermRef mk_mod(TermRef a, TermRef b) {
  if (a->sort != Sort::Int) throw SortError("mod: integer operands required");
  check_divisor(b, "mod");
  if (a->is_const()) return mk_int(euclid_mod(a->val.as_int(), b->val.as_int()));
  return make(TermKind::Mod, Sort::Int, {std::move(a), std::move(b)});
}

// --- structure --------------------------------------------------------------

bool term_eq(const TermRef& a, const TermRef& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->kind != b->kind || a->sort != b->sort) return false;
  switch (a->kind) {
    case TermKind::Const: return a->val == b->val;
    case TermKind::Var: return a->var == b->var && a->tag == b->tag;
    default: break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); i++)
    if (!term_eq(a->kids[i], b->kids[i])) return false;
  return true;
}

int term_cmp(const TermRef& a, const TermRef& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (a->sort != b->sort) return a->sort < b->sort ? -1 : 1;
  switch (a->kind) {
    case TermKind::Const:
      if (a->val == b->val) return 0;
      return a->val.less(b->val) ? -1 : 1;
    case TermKind::Var:
      if (int c = a->var.compare(b->var)) return c < 0 ? -1 : 1;
      if (a->tag != b->tag) return a->tag == StepTag::Curr ? -1 : 1;
      return 0;
    default: break;
  }
  if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
  for (size_t i = 0; i < a->kids.size(); i++)
    if (int c = term_cmp(a->kids[i], b->kids[i])) return c;
  return 0;
}

std::vector<std::pair<std::string, StepTag>> free_vars(const TermRef& t) {
  std::vector<std::pair<std::string, StepTag>> out;
  std::unordered_set<const TermNode*> seen;
  std::unordered_set<std::string> have;  // keyed by tag marker + name
  std::function<void(const TermRef&)> go = [&](const TermRef& u) {
    if (!seen.insert(u.get()).second) return;
    if (u->is_var()) {
      std::string key = (u->tag == StepTag::Prev ? "p:" : "c:") + u->var;
      if (have.insert(key).second) out.emplace_back(u->var, u->tag);
      return;
    }
    for (const auto& k : u->kids) go(k);
  };
  go(t);
  return out;
}

bool mentions_prev(const TermRef& t) {
  for (const auto& [name, tag] : free_vars(t))
    if (tag == StepTag::Prev) return true;
  return false;
}

void collect_constants(const TermRef& t, std::vector<Value>& out) {
  std::unordered_set<const TermNode*> seen;
  std::function<void(const TermRef&)> go = [&](const TermRef& u) {
    if (!seen.insert(u.get()).second) return;
    if (u->is_const() && u->sort != Sort::Bool) {
      bool dup = false;
      for (const auto& v : out)
        if (v == u->val) { dup = true; break; }
      if (!dup) out.push_back(u->val);
      return;
    }
    for (const auto& k : u->kids) go(k);
  };
  go(t);
}

// --- evaluation -------------------------------------------------------------

Value eval(const TermRef& t, const Valuation& env) {
  switch (t->kind) {
    case TermKind::Const: return t->val;
    case TermKind::Var: {
      auto v = env(t->var, t->tag);
      if (!v) throw MissingVar(t->var);
      return *v;
    }
    case TermKind::Not: return Value(!eval(t->kids[0], env).as_bool());
    case TermKind::And:
      for (const auto& k : t->kids)
        if (!eval(k, env).as_bool()) return Value(false);
      return Value(true);
    case TermKind::Or:
      for (const auto& k : t->kids)
        if (eval(k, env).as_bool()) return Value(true);
      return Value(false);
    case TermKind::Xor:
      return Value(eval(t->kids[0], env).as_bool() != eval(t->kids[1], env).as_bool());
    case TermKind::Implies:
      if (!eval(t->kids[0], env).as_bool()) return Value(true);
      return eval(t->kids[1], env);
    case TermKind::Ite:
      return eval(t->kids[0], env).as_bool() ? eval(t->kids[1], env) : eval(t->kids[2], env);
    case TermKind::Eq: return Value(eval(t->kids[0], env) == eval(t->kids[1], env));
    case TermKind::Lt: return Value(eval(t->kids[0], env).less(eval(t->kids[1], env)));
    case TermKind::Le: {
      Value a = eval(t->kids[0], env), b = eval(t->kids[1], env);
      return Value(a.less(b) || a == b);
    }
    case TermKind::Gt: return Value(eval(t->kids[1], env).less(eval(t->kids[0], env)));
    case TermKind::Ge: {
      Value a = eval(t->kids[0], env), b = eval(t->kids[1], env);
      return Value(b.less(a) || a == b);
    }
    case TermKind::Add: return num_add(eval(t->kids[0], env), eval(t->kids[1], env));
    case TermKind::Sub: return num_sub(eval(t->kids[0], env), eval(t->kids[1], env));
    case TermKind::Neg: {
      Value a = eval(t->kids[0], env);
      if (a.is_int()) return Value(mpz_class(-a.as_int()));
      return Value(mpq_class(-a.as_real()));
    }
    case TermKind::Mul: return num_mul(eval(t->kids[0], env), eval(t->kids[1], env));
    case TermKind::Div:
      return Value(euclid_div(eval(t->kids[0], env).as_int(), eval(t->kids[1], env).as_int()));
    case TermKind::Mod:
      return Value(euclid_mod(eval(t->kids[0], env).as_int(), eval(t->kids[1], env).as_int()));
  }
  throw ProtocolError("eval: unhandled term kind");
}

// --- SMT-LIB2 serialization -------------------------------------------------

static void smt_value(const Value& v, std::string& out) {
  if (v.is_bool()) {
    out += v.as_bool() ? "true" : "false";
    return;
  }
  if (v.is_int()) {
    const mpz_class& z = v.as_int();
    if (z < 0) {
      out += "(- " + mpz_class(-z).get_str() + ")";
    } else {
      out += z.get_str();
    }
    return;
  }
  // Reals serialize uniformly as rationals; negatives wrap the whole fraction.
  mpq_class q = v.as_real();
  bool neg = q < 0;
  if (neg) {
    q = -q;
    out += "(- ";
  }
  out += "(/ " + q.get_num().get_str() + " " + q.get_den().get_str() + ")";
  if (neg) out += ")";
}

void to_smtlib(const TermRef& t, const Namer& namer, std::string& out) {
  static const char* ops[] = {
      "",    "",   "not", "and", "or",  "xor", "=>",  "ite", "=",   "<",
      "<=",  ">",  ">=",  "+",   "-",   "-",   "*",   "div", "mod",
  };
  switch (t->kind) {
    case TermKind::Const: smt_value(t->val, out); return;
    case TermKind::Var: out += namer(t->var, t->tag); return;
    default: break;
  }
  out += "(";
  out += ops[static_cast<int>(t->kind)];
  for (const auto& k : t->kids) {
    out += " ";
    to_smtlib(k, namer, out);
  }
  out += ")";
}

std::string to_smtlib(const TermRef& t, const Namer& namer) {
  std::string s;
  to_smtlib(t, namer, s);
  return s;
}

std::string indexed_name(const std::string& v, int i) {
  // `$` and `-` are legal SMT-LIB2 simple-symbol characters, so v$-1 (the
  // pre-initial value read by an uninitialized `pre`) needs no quoting.
  return v + "$" + std::to_string(i);
}

Namer step_namer(int i) {
  return [i](const std::string& v, StepTag tag) {
    return indexed_name(v, tag == StepTag::Prev ? i - 1 : i);
  };
}

std::string smt_at(const TermRef& t, int i) { return to_smtlib(t, step_namer(i)); }

}  // namespace minikind
