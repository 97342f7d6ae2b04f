#include "minikind/elaborate.hpp"

#include <functional>

#include "json.hpp"

namespace minikind {

// --- TransitionSystem accessors ---------------------------------------------

bool TransitionSystem::has_var(const std::string& name) const {
  for (const auto& [n, s] : vars)
    if (n == name) return true;
  return false;
}

Sort TransitionSystem::sort_of(const std::string& name) const {
  for (const auto& [n, s] : vars)
    if (n == name) return s;
  throw ProtocolError("unknown variable '" + name + "'");
}

bool TransitionSystem::is_input(const std::string& name) const {
  for (const auto& i : inputs)
    if (i == name) return true;
  return false;
}

const Equation* TransitionSystem::equation_for(const std::string& lhs) const {
  for (const auto& eq : equations)
    if (eq.lhs == lhs) return &eq;
  return nullptr;
}

const TermRef* TransitionSystem::property(const std::string& name) const {
  for (const auto& [n, t] : properties)
    if (n == name) return &t;
  return nullptr;
}

std::vector<std::string> TransitionSystem::state_vars() const {
  std::set<std::string> prevs;
  auto scan = [&](const TermRef& t) {
    for (const auto& [name, tag] : free_vars(t))
      if (tag == StepTag::Prev) prevs.insert(name);
  };
  for (const auto& eq : equations) scan(eq.rhs);
  for (const auto& a : assertions) scan(a);
  for (const auto& [n, p] : properties) scan(p);
  std::vector<std::string> out;
  out.push_back(init_flag);
  for (const auto& [n, s] : vars)
    if (n != init_flag && prevs.count(n)) out.push_back(n);
  return out;
}

std::string TransitionSystem::smt_logic() const {
  bool has_int = false, has_real = false;
  for (const auto& [n, s] : vars) {
    has_int |= s == Sort::Int;
    has_real |= s == Sort::Real;
  }
  if (has_int && has_real) return "QF_LIRA";
  if (has_real) return "QF_LRA";
  return "QF_LIA";
}

// --- inlining ---------------------------------------------------------------

namespace {

class Inliner {
 public:
  explicit Inliner(const TypedProgram& p) : prog_(p) {}

  FlatNode run() {
    const NodeDecl& main = prog_.main_node();
    out_.file = main.span.file;
    // Main's variables keep their bare source names.
    std::map<std::string, std::string> ident;
    for (const auto* group : {&main.inputs, &main.outputs, &main.locals})
      for (const auto& v : *group) ident[v.name] = v.name;

    for (const auto& v : main.inputs) {
      out_.inputs.push_back(v);
      out_.sorts[v.name] = v.sort;
      out_.provenance[v.name] = {v.span, v.name};
    }
    emit_body(main, ident, main.name);
    out_.properties = main.properties;
    return std::move(out_);
  }

 private:
  // Copies one node body into the flat scope. `ren` maps the node's own
  // variable names to flat names; `path` is the dotted prefix for calls made
  // from this body.
  void emit_body(const NodeDecl& nd, const std::map<std::string, std::string>& ren,
                 const std::string& path) {
    std::map<std::string, int> call_counters;
    for (const auto* group : {&nd.outputs, &nd.locals})
      for (const auto& v : *group) declare(ren.at(v.name), v.sort, v.span);
    for (const auto& eq : nd.equations) {
      ExprPtr rhs = copy(eq.rhs, ren, path, call_counters);
      out_.equations.push_back({ren.at(eq.lhs), rhs, eq.span});
    }
    for (const auto& a : nd.assertions)
      out_.assertions.push_back(copy(a, ren, path, call_counters));
  }

  void declare(const std::string& flat, Sort sort, const SourceSpan& span) {
    out_.defined.push_back({flat, sort, span});
    out_.sorts[flat] = sort;
    out_.provenance[flat] = {span, flat};
  }

  ExprPtr copy(const ExprPtr& e, const std::map<std::string, std::string>& ren,
               const std::string& path, std::map<std::string, int>& counters) {
    if (e->kind == ExprKind::VarRef) {
      ExprPtr c = std::make_shared<Expr>(*e);
      c->name = ren.at(e->name);
      return c;
    }
    if (e->kind == ExprKind::Call) return expand_call(e, ren, path, counters);
    ExprPtr c = std::make_shared<Expr>(*e);
    for (auto& a : c->args) a = copy(a, ren, path, counters);
    return c;
  }

  ExprPtr expand_call(const ExprPtr& e, const std::map<std::string, std::string>& ren,
                      const std::string& path, std::map<std::string, int>& counters) {
    const NodeDecl& callee = *prog_.find_node(e->name);
    int idx = ++counters[e->name];
    std::string prefix = path + "." + e->name + std::to_string(idx);

    std::map<std::string, std::string> sub;
    for (const auto* group : {&callee.inputs, &callee.outputs, &callee.locals})
      for (const auto& v : *group) sub[v.name] = prefix + "." + v.name;

    // Bind the instance's inputs to the (already copied) argument expressions.
    for (size_t i = 0; i < callee.inputs.size(); i++) {
      const VarDecl& in = callee.inputs[i];
      declare(sub.at(in.name), in.sort, in.span);
      ExprPtr arg = copy(e->args[i], ren, path, counters);
      out_.equations.push_back({sub.at(in.name), arg, e->args[i]->span});
    }
    emit_body(callee, sub, prefix);

    ExprPtr ref = mk_expr(ExprKind::VarRef, e->span);
    ref->name = sub.at(callee.outputs[0].name);
    ref->sort = callee.outputs[0].sort;
    ref->typed = true;
    return ref;
  }

  const TypedProgram& prog_;
  FlatNode out_;
};

}  // namespace

FlatNode inline_nodes(const TypedProgram& p) { return Inliner(p).run(); }

// --- slicing ----------------------------------------------------------------

namespace {

void all_var_refs(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::VarRef) {
    out.insert(e.name);
    return;
  }
  for (const auto& a : e.args) all_var_refs(*a, out);
}

}  // namespace

std::set<std::string> cone_of_influence(const FlatNode& fn, const std::set<std::string>& roots) {
  std::map<std::string, std::set<std::string>> deps;
  for (const auto& eq : fn.equations) all_var_refs(*eq.rhs, deps[eq.lhs]);

  std::set<std::string> reach;
  std::vector<std::string> work(roots.begin(), roots.end());
  while (!work.empty()) {
    std::string v = work.back();
    work.pop_back();
    if (!deps.count(v)) continue;  // input or undefined
    if (!reach.insert(v).second) continue;
    for (const auto& d : deps.at(v)) work.push_back(d);
  }
  return reach;
}

FlatNode slice(FlatNode fn) {
  std::set<std::string> roots;
  for (const auto& [p, span] : fn.properties) roots.insert(p);
  for (const auto& a : fn.assertions) all_var_refs(*a, roots);

  std::set<std::string> keep = cone_of_influence(fn, roots);

  std::vector<AstEquation> eqs;
  for (auto& eq : fn.equations)
    if (keep.count(eq.lhs)) eqs.push_back(std::move(eq));
  fn.equations = std::move(eqs);

  std::vector<VarDecl> defined;
  for (auto& v : fn.defined)
    if (keep.count(v.name)) defined.push_back(std::move(v));
  fn.defined = std::move(defined);

  std::set<std::string> used;
  for (const auto& eq : fn.equations) all_var_refs(*eq.rhs, used);
  for (const auto& a : fn.assertions) all_var_refs(*a, used);
  fn.unused_inputs.clear();
  for (const auto& in : fn.inputs)
    if (!used.count(in.name)) fn.unused_inputs.insert(in.name);
  return fn;
}

// --- translation to the transition system -----------------------------------

namespace {

class Translator {
 public:
  explicit Translator(const FlatNode& fn) : fn_(fn) {}

  TransitionSystem run() {
    ts_.source_file = fn_.file;
    ts_.inputs.reserve(fn_.inputs.size());
    for (const auto& v : fn_.inputs) {
      ts_.inputs.push_back(v.name);
      ts_.provenance[v.name] = fn_.provenance.at(v.name);
    }
    ts_.unused_inputs = fn_.unused_inputs;

    for (const auto& eq : fn_.equations) {
      TermRef rhs = translate(*eq.rhs);
      ts_.equations.push_back({eq.lhs, eq.lhs, rhs, eq.span});
      ts_.provenance[eq.lhs] = fn_.provenance.at(eq.lhs);
    }
    for (const auto& a : fn_.assertions) ts_.assertions.push_back(translate(*a));
    for (const auto& [p, span] : fn_.properties)
      ts_.properties.emplace_back(p, mk_var(p, Sort::Bool));

    // Ordered variable table: %init, inputs, then defined in equation order.
    ts_.vars.emplace_back(ts_.init_flag, Sort::Bool);
    for (const auto& v : fn_.inputs) ts_.vars.emplace_back(v.name, v.sort);
    for (const auto& eq : ts_.equations) ts_.vars.emplace_back(eq.lhs, sort_of_flat(eq.lhs));
    return std::move(ts_);
  }

 private:
  Sort sort_of_flat(const std::string& name) {
    auto it = fn_.sorts.find(name);
    if (it != fn_.sorts.end()) return it->second;
    return aux_sorts_.at(name);
  }

  TermRef translate(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return mk_int(e.int_val);
      case ExprKind::RealLit: return mk_real(e.real_val);
      case ExprKind::BoolLit: return mk_bool(e.bool_val);
      case ExprKind::VarRef: return mk_var(e.name, e.sort);
      case ExprKind::Unary: {
        TermRef a = translate(*e.args[0]);
        return e.un == UnOp::Not ? mk_not(a) : mk_neg(a);
      }
      case ExprKind::Binary: {
        TermRef a = translate(*e.args[0]);
        TermRef b = translate(*e.args[1]);
        switch (e.bin) {
          case BinOp::Add: return mk_add(a, b);
          case BinOp::Sub: return mk_sub(a, b);
          case BinOp::Mul: return mk_mul(a, b);
          case BinOp::Div: return mk_div(a, b);
          case BinOp::Mod: return mk_mod(a, b);
          case BinOp::Lt: return mk_lt(a, b);
          case BinOp::Le: return mk_le(a, b);
          case BinOp::Gt: return mk_gt(a, b);
          case BinOp::Ge: return mk_ge(a, b);
          case BinOp::Eq: return mk_eq(a, b);
          case BinOp::Neq: return mk_neq(a, b);
          case BinOp::And: return mk_and(a, b);
          case BinOp::Or: return mk_or(a, b);
          case BinOp::Xor: return mk_xor(a, b);
          case BinOp::Implies: return mk_implies(a, b);
        }
        throw ProtocolError("unhandled binary op");
      }
      case ExprKind::Ite:
        return mk_ite(translate(*e.args[0]), translate(*e.args[1]), translate(*e.args[2]));
      case ExprKind::Arrow:
        // e1 -> e2  ==>  ite(%init, e1, e2)
        return mk_ite(mk_var(ts_.init_flag, Sort::Bool), translate(*e.args[0]),
                      translate(*e.args[1]));
      case ExprKind::Pre: {
        const Expr& operand = *e.args[0];
        if (operand.kind == ExprKind::VarRef) return mk_prev(operand.name, operand.sort);
        // pre of a compound expression: introduce an auxiliary stream.
        TermRef inner = translate(operand);
        std::string aux = "%pre" + std::to_string(++pre_counter_);
        aux_sorts_[aux] = operand.sort;
        ts_.equations.push_back({aux, aux, inner, operand.span});
        ts_.provenance[aux] = {operand.span, aux};
        return mk_prev(aux, operand.sort);
      }
      case ExprKind::Call: throw ProtocolError("call survived inlining");
    }
    throw ProtocolError("unhandled expression kind");
  }

  const FlatNode& fn_;
  TransitionSystem ts_;
  std::map<std::string, Sort> aux_sorts_;
  int pre_counter_ = 0;
};

}  // namespace

TransitionSystem to_transition_system(const FlatNode& fn) { return Translator(fn).run(); }

TransitionSystem elaborate(const TypedProgram& p) {
  return to_transition_system(slice(inline_nodes(p)));
}

// --- JSON dump --------------------------------------------------------------

std::string dump_ts_json(const TransitionSystem& ts) {
  using json = nlohmann::ordered_json;
  auto readable = [](const TermRef& t) {
    return to_smtlib(t, [](const std::string& v, StepTag tag) {
      return tag == StepTag::Prev ? "(pre " + v + ")" : v;
    });
  };
  json j;
  j["file"] = ts.source_file;
  j["init_flag"] = ts.init_flag;
  json vars = json::array();
  for (const auto& [n, s] : ts.vars) vars.push_back({{"name", n}, {"sort", sort_name(s)}});
  j["vars"] = vars;
  j["inputs"] = ts.inputs;
  j["unused_inputs"] = std::vector<std::string>(ts.unused_inputs.begin(), ts.unused_inputs.end());
  json eqs = json::array();
  for (const auto& eq : ts.equations)
    eqs.push_back({{"id", eq.id},
                   {"lhs", eq.lhs},
                   {"rhs", readable(eq.rhs)},
                   {"span", eq.span.str()}});
  j["equations"] = eqs;
  json asserts = json::array();
  for (const auto& a : ts.assertions) asserts.push_back(readable(a));
  j["assertions"] = asserts;
  json props = json::array();
  for (const auto& [n, t] : ts.properties) props.push_back({{"name", n}, {"term", readable(t)}});
  j["properties"] = props;
  json prov = json::object();
  for (const auto& [n, p] : ts.provenance)
    prov[n] = {{"span", p.span.str()}, {"path", p.dotted}};
  j["provenance"] = prov;
  j["logic"] = ts.smt_logic();
  return j.dump(2) + "\n";
}

}  // namespace minikind
