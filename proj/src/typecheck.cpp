#include "minikind/typecheck.hpp"

#include <map>
#include <set>

namespace minikind {

namespace {

[[noreturn]] void type_fail(const SourceSpan& span, const std::string& msg) {
  throw TypeError(span, msg);
}

std::optional<Value> fold_binary(BinOp op, const Value& a, const Value& b) {
  switch (op) {
    case BinOp::Add:
      if (a.is_int()) return Value(mpz_class(a.as_int() + b.as_int()));
      return Value(mpq_class(a.as_real() + b.as_real()));
    case BinOp::Sub:
      if (a.is_int()) return Value(mpz_class(a.as_int() - b.as_int()));
      return Value(mpq_class(a.as_real() - b.as_real()));
    case BinOp::Mul:
      if (a.is_int()) return Value(mpz_class(a.as_int() * b.as_int()));
      return Value(mpq_class(a.as_real() * b.as_real()));
    case BinOp::Div:
      if (b.as_int() == 0) return std::nullopt;
      return Value(euclid_div(a.as_int(), b.as_int()));
    case BinOp::Mod:
      if (b.as_int() == 0) return std::nullopt;
      return Value(euclid_mod(a.as_int(), b.as_int()));
    case BinOp::Lt: return Value(a.less(b));
    case BinOp::Le: return Value(a.less(b) || a == b);
    case BinOp::Gt: return Value(b.less(a));
    case BinOp::Ge: return Value(b.less(a) || a == b);
    case BinOp::Eq: return Value(a == b);
    case BinOp::Neq: return Value(!(a == b));
    case BinOp::And: return Value(a.as_bool() && b.as_bool());
    case BinOp::Or: return Value(a.as_bool() || b.as_bool());
    case BinOp::Xor: return Value(a.as_bool() != b.as_bool());
    case BinOp::Implies: return Value(!a.as_bool() || b.as_bool());
  }
  return std::nullopt;
}

}  // namespace

std::optional<Value> const_fold(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::IntLit: return Value(e->int_val);
    case ExprKind::RealLit: return Value(e->real_val);
    case ExprKind::BoolLit: return Value(e->bool_val);
    case ExprKind::Unary: {
      auto a = const_fold(e->args[0]);
      if (!a) return std::nullopt;
      if (e->un == UnOp::Not) return Value(!a->as_bool());
      if (a->is_int()) return Value(mpz_class(-a->as_int()));
      return Value(mpq_class(-a->as_real()));
    }
    case ExprKind::Binary: {
      auto a = const_fold(e->args[0]);
      if (!a) return std::nullopt;
      auto b = const_fold(e->args[1]);
      if (!b) return std::nullopt;
      return fold_binary(e->bin, *a, *b);
    }
    case ExprKind::Ite: {
      auto c = const_fold(e->args[0]);
      if (!c) return std::nullopt;
      return const_fold(e->args[c->as_bool() ? 1 : 2]);
    }
    default: return std::nullopt;  // vars, pre, ->, calls
  }
}

namespace {

class Checker {
 public:
  explicit Checker(Program& p) : prog_(p) {}

  void run() {
    check_node_names();
    check_no_recursion();
    for (auto& nd : prog_.nodes) check_node(nd);
  }

 private:
  void check_node_names() {
    std::set<std::string> seen;
    for (const auto& nd : prog_.nodes)
      if (!seen.insert(nd.name).second)
        type_fail(nd.span, "duplicate node name '" + nd.name + "'");
  }

  void check_no_recursion() {
    // DFS over the call graph; gray nodes on the stack witness a cycle.
    std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
    std::vector<std::string> stack;
    std::function<void(const NodeDecl&)> visit = [&](const NodeDecl& nd) {
      color[nd.name] = 1;
      stack.push_back(nd.name);
      for (const auto& eq : nd.equations) visit_calls(*eq.rhs, nd, visit, color, stack);
      for (const auto& a : nd.assertions) visit_calls(*a, nd, visit, color, stack);
      color[nd.name] = 2;
      stack.pop_back();
    };
    for (const auto& nd : prog_.nodes)
      if (color[nd.name] == 0) visit(nd);
  }

  void visit_calls(const Expr& e, const NodeDecl& from,
                   const std::function<void(const NodeDecl&)>& visit,
                   std::map<std::string, int>& color, std::vector<std::string>& stack) {
    if (e.kind == ExprKind::Call) {
      const NodeDecl* callee = prog_.find_node(e.name);
      if (!callee) type_fail(e.span, "call to undeclared node '" + e.name + "'");
      if (color[callee->name] == 1) {
        std::string path;
        auto it = std::find(stack.begin(), stack.end(), callee->name);
        for (; it != stack.end(); ++it) path += *it + " -> ";
        path += callee->name;
        throw RecursionError(e.span, "recursive node call: " + path);
      }
      if (color[callee->name] == 0) visit(*callee);
    }
    for (const auto& a : e.args) visit_calls(*a, from, visit, color, stack);
  }

  void check_node(NodeDecl& nd) {
    std::map<std::string, Sort> env;
    for (const auto* group : {&nd.inputs, &nd.outputs, &nd.locals})
      for (const auto& v : *group)
        if (!env.emplace(v.name, v.sort).second)
          type_fail(v.span, "duplicate variable '" + v.name + "' in node '" + nd.name + "'");

    std::set<std::string> defined;
    std::set<std::string> inputs;
    for (const auto& v : nd.inputs) inputs.insert(v.name);
    for (auto& eq : nd.equations) {
      auto it = env.find(eq.lhs);
      if (it == env.end())
        type_fail(eq.span, "equation defines undeclared variable '" + eq.lhs + "'");
      if (inputs.count(eq.lhs))
        type_fail(eq.span, "equation redefines input '" + eq.lhs + "'");
      if (!defined.insert(eq.lhs).second)
        type_fail(eq.span, "variable '" + eq.lhs + "' defined more than once");
      Sort s = expr_sort(*eq.rhs, env, nd);
      if (s != it->second)
        type_fail(eq.span, "equation for '" + eq.lhs + "' has sort " + sort_name(s) +
                               ", declared " + sort_name(it->second));
    }
    for (const auto* group : {&nd.outputs, &nd.locals})
      for (const auto& v : *group)
        if (!defined.count(v.name))
          type_fail(v.span, "variable '" + v.name + "' is never defined");

    for (auto& a : nd.assertions)
      if (expr_sort(*a, env, nd) != Sort::Bool)
        type_fail(a->span, "assertion must be bool");

    for (const auto& [pname, pspan] : nd.properties) {
      auto it = env.find(pname);
      if (it == env.end())
        type_fail(pspan, "property pragma names undeclared stream '" + pname + "'");
      if (it->second != Sort::Bool)
        type_fail(pspan, "property stream '" + pname + "' must be bool, is " +
                             sort_name(it->second));
    }

    check_cycles(nd);
  }

  Sort expr_sort(Expr& e, const std::map<std::string, Sort>& env, const NodeDecl& nd) {
    Sort s = expr_sort_inner(e, env, nd);
    e.sort = s;
    e.typed = true;
    return s;
  }

  Sort expr_sort_inner(Expr& e, const std::map<std::string, Sort>& env, const NodeDecl& nd) {
    switch (e.kind) {
      case ExprKind::IntLit: return Sort::Int;
      case ExprKind::RealLit: return Sort::Real;
      case ExprKind::BoolLit: return Sort::Bool;
      case ExprKind::VarRef: {
        auto it = env.find(e.name);
        if (it == env.end()) type_fail(e.span, "undeclared variable '" + e.name + "'");
        return it->second;
      }
      case ExprKind::Unary: {
        Sort a = expr_sort(*e.args[0], env, nd);
        if (e.un == UnOp::Not) {
          if (a != Sort::Bool) type_fail(e.span, "'not' needs a bool operand");
          return Sort::Bool;
        }
        if (a == Sort::Bool) type_fail(e.span, "unary '-' needs a numeric operand");
        return a;
      }
      case ExprKind::Binary: return binary_sort(e, env, nd);
      case ExprKind::Ite: {
        if (expr_sort(*e.args[0], env, nd) != Sort::Bool)
          type_fail(e.args[0]->span, "'if' condition must be bool");
        Sort t = expr_sort(*e.args[1], env, nd);
        Sort f = expr_sort(*e.args[2], env, nd);
        if (t != f)
          type_fail(e.span, std::string("'if' branches differ in sort: ") + sort_name(t) +
                                " vs " + sort_name(f));
        return t;
      }
      case ExprKind::Arrow: {
        Sort a = expr_sort(*e.args[0], env, nd);
        Sort b = expr_sort(*e.args[1], env, nd);
        if (a != b)
          type_fail(e.span, std::string("'->' operands differ in sort: ") + sort_name(a) +
                                " vs " + sort_name(b));
        return a;
      }
      case ExprKind::Pre: return expr_sort(*e.args[0], env, nd);
      case ExprKind::Call: {
        const NodeDecl* callee = prog_.find_node(e.name);
        if (!callee) type_fail(e.span, "call to undeclared node '" + e.name + "'");
        if (callee->outputs.size() != 1)
          type_fail(e.span, "node '" + e.name + "' has " +
                                std::to_string(callee->outputs.size()) +
                                " outputs; only single-output nodes can be called in "
                                "expressions");
        if (e.args.size() != callee->inputs.size())
          type_fail(e.span, "node '" + e.name + "' expects " +
                                std::to_string(callee->inputs.size()) + " arguments, got " +
                                std::to_string(e.args.size()));
        for (size_t i = 0; i < e.args.size(); i++) {
          Sort a = expr_sort(*e.args[i], env, nd);
          if (a != callee->inputs[i].sort)
            type_fail(e.args[i]->span,
                      "argument " + std::to_string(i + 1) + " of '" + e.name + "' has sort " +
                          sort_name(a) + ", expected " + sort_name(callee->inputs[i].sort));
        }
        return callee->outputs[0].sort;
      }
    }
    type_fail(e.span, "unhandled expression kind");
  }

  Sort binary_sort(Expr& e, const std::map<std::string, Sort>& env, const NodeDecl& nd) {
    Sort a = expr_sort(*e.args[0], env, nd);
    Sort b = expr_sort(*e.args[1], env, nd);
    auto need_same = [&]() {
      if (a != b)
        type_fail(e.span, std::string("'") + binop_name(e.bin) + "' operands differ in sort: " +
                              sort_name(a) + " vs " + sort_name(b));
    };
    auto need_numeric = [&]() {
      need_same();
      if (a == Sort::Bool)
        type_fail(e.span, std::string("'") + binop_name(e.bin) + "' needs numeric operands");
    };
    auto need_bool = [&]() {
      if (a != Sort::Bool || b != Sort::Bool)
        type_fail(e.span, std::string("'") + binop_name(e.bin) + "' needs bool operands");
    };
    switch (e.bin) {
      case BinOp::Add:
      case BinOp::Sub:
        need_numeric();
        return a;
      case BinOp::Mul: {
        need_numeric();
        if (!const_fold(e.args[0]) && !const_fold(e.args[1]))
          throw LinearityError(e.span, "nonlinear '*': neither operand is constant");
        return a;
      }
      case BinOp::Div:
      case BinOp::Mod: {
        need_same();
        if (a != Sort::Int)
          type_fail(e.span, std::string("'") + binop_name(e.bin) + "' needs integer operands");
        auto d = const_fold(e.args[1]);
        if (!d)
          throw LinearityError(e.span,
                               std::string("'") + binop_name(e.bin) + "' divisor must be constant");
        if (d->as_int() == 0)
          throw LinearityError(e.span, std::string("'") + binop_name(e.bin) + "' divisor is zero");
        return Sort::Int;
      }
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge:
        need_numeric();
        return Sort::Bool;
      case BinOp::Eq:
      case BinOp::Neq:
        need_same();
        return Sort::Bool;
      case BinOp::And:
      case BinOp::Or:
      case BinOp::Xor:
      case BinOp::Implies:
        need_bool();
        return Sort::Bool;
    }
    type_fail(e.span, "unhandled binary operator");
  }

  // Current-step dependencies of an expression: variable references not under
  // `pre`. Calls conservatively depend on all their arguments.
  void curr_deps(const Expr& e, std::set<std::string>& out) {
    switch (e.kind) {
      case ExprKind::VarRef: out.insert(e.name); return;
      case ExprKind::Pre: return;
      default:
        for (const auto& a : e.args) curr_deps(*a, out);
    }
  }

  void check_cycles(const NodeDecl& nd) {
    std::map<std::string, const AstEquation*> eq_of;
    for (const auto& eq : nd.equations) eq_of[eq.lhs] = &eq;

    std::map<std::string, int> color;
    std::vector<std::string> stack;
    std::function<void(const std::string&)> visit = [&](const std::string& v) {
      auto it = eq_of.find(v);
      if (it == eq_of.end()) return;  // input: no equation, no cycle through it
      color[v] = 1;
      stack.push_back(v);
      std::set<std::string> deps;
      curr_deps(*it->second->rhs, deps);
      for (const auto& d : deps) {
        if (color[d] == 1) {
          std::string path;
          auto s = std::find(stack.begin(), stack.end(), d);
          for (; s != stack.end(); ++s) path += *s + " -> ";
          path += d;
          throw CycleError(it->second->span, "dependency cycle: " + path);
        }
        if (color[d] == 0) visit(d);
      }
      color[v] = 2;
      stack.pop_back();
    };
    for (const auto& eq : nd.equations)
      if (color[eq.lhs] == 0) visit(eq.lhs);
  }

  Program& prog_;
};

}  // namespace

TypedProgram typecheck(Program program) {
  Checker c(program);
  c.run();
  return program;
}

Sort check_flat_expr(const ExprPtr& e,
                     const std::function<std::optional<Sort>(const std::string&)>& lookup,
                     bool allow_temporal) {
  std::function<Sort(Expr&)> go = [&](Expr& x) -> Sort {
    auto set = [&](Sort s) {
      x.sort = s;
      x.typed = true;
      return s;
    };
    switch (x.kind) {
      case ExprKind::IntLit: return set(Sort::Int);
      case ExprKind::RealLit: return set(Sort::Real);
      case ExprKind::BoolLit: return set(Sort::Bool);
      case ExprKind::VarRef: {
        auto s = lookup(x.name);
        if (!s) type_fail(x.span, "unknown variable '" + x.name + "'");
        return set(*s);
      }
      case ExprKind::Call: type_fail(x.span, "node calls are not allowed here");
      case ExprKind::Pre:
      case ExprKind::Arrow: {
        if (!allow_temporal) type_fail(x.span, "temporal operators are not allowed here");
        Sort a = go(*x.args[0]);
        if (x.kind == ExprKind::Arrow && go(*x.args[1]) != a)
          type_fail(x.span, "'->' operands differ in sort");
        return set(a);
      }
      case ExprKind::Unary: {
        Sort a = go(*x.args[0]);
        if (x.un == UnOp::Not) {
          if (a != Sort::Bool) type_fail(x.span, "'not' needs a bool operand");
          return set(Sort::Bool);
        }
        if (a == Sort::Bool) type_fail(x.span, "unary '-' needs a numeric operand");
        return set(a);
      }
      case ExprKind::Ite: {
        if (go(*x.args[0]) != Sort::Bool) type_fail(x.span, "'if' condition must be bool");
        Sort t = go(*x.args[1]);
        if (go(*x.args[2]) != t) type_fail(x.span, "'if' branches differ in sort");
        return set(t);
      }
      case ExprKind::Binary: {
        Sort a = go(*x.args[0]);
        Sort b = go(*x.args[1]);
        switch (x.bin) {
          case BinOp::Add:
          case BinOp::Sub:
            if (a != b || a == Sort::Bool) type_fail(x.span, "numeric operands required");
            return set(a);
          case BinOp::Mul:
            if (a != b || a == Sort::Bool) type_fail(x.span, "numeric operands required");
            if (!const_fold(x.args[0]) && !const_fold(x.args[1]))
              throw LinearityError(x.span, "nonlinear '*'");
            return set(a);
          case BinOp::Div:
          case BinOp::Mod: {
            if (a != Sort::Int || b != Sort::Int) type_fail(x.span, "integer operands required");
            auto d = const_fold(x.args[1]);
            if (!d || d->as_int() == 0)
              throw LinearityError(x.span, "divisor must be a nonzero constant");
            return set(Sort::Int);
          }
          case BinOp::Lt:
          case BinOp::Le:
          case BinOp::Gt:
          case BinOp::Ge:
            if (a != b || a == Sort::Bool) type_fail(x.span, "numeric operands required");
            return set(Sort::Bool);
          case BinOp::Eq:
          case BinOp::Neq:
            if (a != b) type_fail(x.span, "operands differ in sort");
            return set(Sort::Bool);
          case BinOp::And:
          case BinOp::Or:
          case BinOp::Xor:
          case BinOp::Implies:
            if (a != Sort::Bool || b != Sort::Bool) type_fail(x.span, "bool operands required");
            return set(Sort::Bool);
        }
        type_fail(x.span, "unhandled operator");
      }
    }
    type_fail(x.span, "unhandled expression kind");
  };
  return go(*e);
}

}  // namespace minikind
