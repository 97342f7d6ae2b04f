#include "minikind/pretty.hpp"

#include <sstream>

namespace minikind {

namespace {

// Precedence levels, loosest binding first; matches the parser.
enum Level {
  LvlArrow = 0,  // if/then/else and ->
  LvlImplies = 1,
  LvlOr = 2,
  LvlAnd = 3,
  LvlNot = 4,
  LvlCmp = 5,
  LvlAdd = 6,
  LvlMul = 7,
  LvlUnary = 8,
  LvlAtom = 9,
};

int binop_level(BinOp op) {
  switch (op) {
    case BinOp::Implies: return LvlImplies;
    case BinOp::Or:
    case BinOp::Xor: return LvlOr;
    case BinOp::And: return LvlAnd;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Neq: return LvlCmp;
    case BinOp::Add:
    case BinOp::Sub: return LvlAdd;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return LvlMul;
  }
  return LvlAtom;
}

bool binop_right_assoc(BinOp op) { return op == BinOp::Implies; }
bool binop_non_assoc(BinOp op) { return binop_level(op) == LvlCmp; }

void print_expr(const Expr& e, int min_level, std::string& out);

void child(const Expr& e, int min_level, std::string& out) {
  print_expr(e, min_level, out);
}

void print_expr(const Expr& e, int min_level, std::string& out) {
  int level;
  std::string body;
  switch (e.kind) {
    case ExprKind::IntLit:
      level = LvlAtom;
      body = e.int_val.get_str();
      break;
    case ExprKind::RealLit: {
      level = LvlAtom;
      auto d = decimal_of_rational(e.real_val);
      body = d ? *d : e.real_val.get_str();  // non-decimal rationals only in error paths
      break;
    }
    case ExprKind::BoolLit:
      level = LvlAtom;
      body = e.bool_val ? "true" : "false";
      break;
    case ExprKind::VarRef:
      level = LvlAtom;
      body = e.name;
      break;
    case ExprKind::Call: {
      level = LvlAtom;
      body = e.name + "(";
      for (size_t i = 0; i < e.args.size(); i++) {
        if (i) body += ", ";
        print_expr(*e.args[i], LvlArrow, body);
      }
      body += ")";
      break;
    }
    case ExprKind::Unary: {
      if (e.un == UnOp::Not) {
        level = LvlNot;
        body = "not ";
        child(*e.args[0], LvlNot, body);
      } else {
        level = LvlUnary;
        body = "-";
        // "--x" would lex as a comment, so a negated negation is parenthesized.
        const Expr& a = *e.args[0];
        bool wrap = a.kind == ExprKind::Unary && a.un == UnOp::Neg;
        child(a, wrap ? LvlAtom : LvlUnary, body);
      }
      break;
    }
    case ExprKind::Pre: {
      level = LvlUnary;
      body = "pre ";
      child(*e.args[0], LvlUnary, body);
      break;
    }
    case ExprKind::Binary: {
      level = binop_level(e.bin);
      int left_min = binop_right_assoc(e.bin) || binop_non_assoc(e.bin) ? level + 1 : level;
      int right_min = binop_right_assoc(e.bin) ? level : level + 1;
      child(*e.args[0], left_min, body);
      body += std::string(" ") + binop_name(e.bin) + " ";
      child(*e.args[1], right_min, body);
      break;
    }
    case ExprKind::Arrow: {
      level = LvlArrow;
      child(*e.args[0], LvlArrow + 1, body);
      body += " -> ";
      child(*e.args[1], LvlArrow, body);
      break;
    }
    case ExprKind::Ite: {
      level = LvlArrow;
      body = "if ";
      child(*e.args[0], LvlArrow, body);
      body += " then ";
      child(*e.args[1], LvlArrow, body);
      body += " else ";
      child(*e.args[2], LvlArrow, body);
      break;
    }
    default: body = "?";  level = LvlAtom;
  }
  if (level < min_level) {
    out += "(";
    out += body;
    out += ")";
  } else {
    out += body;
  }
}

void print_groups(const std::vector<VarDecl>& vars, std::string& out) {
  // Adjacent declarations of the same sort are grouped: a, b: int; c: bool
  size_t i = 0;
  bool first = true;
  while (i < vars.size()) {
    size_t j = i;
    while (j + 1 < vars.size() && vars[j + 1].sort == vars[i].sort) j++;
    if (!first) out += "; ";
    first = false;
    for (size_t k = i; k <= j; k++) {
      if (k > i) out += ", ";
      out += vars[k].name;
    }
    out += ": ";
    out += sort_name(vars[i].sort);
    i = j + 1;
  }
}

}  // namespace

std::string pretty_expr(const Expr& e) {
  std::string s;
  print_expr(e, LvlArrow, s);
  return s;
}

std::string pretty(const Program& p) {
  std::ostringstream out;
  for (const auto& nd : p.nodes) {
    std::string ins, outs;
    print_groups(nd.inputs, ins);
    print_groups(nd.outputs, outs);
    out << "node " << nd.name << "(" << ins << ") returns (" << outs << ");\n";
    if (!nd.locals.empty()) {
      out << "var\n";
      for (const auto& v : nd.locals)
        out << "  " << v.name << ": " << sort_name(v.sort) << ";\n";
    }
    out << "let\n";
    for (const auto& eq : nd.equations)
      out << "  " << eq.lhs << " = " << pretty_expr(*eq.rhs) << ";\n";
    for (const auto& a : nd.assertions) out << "  assert " << pretty_expr(*a) << ";\n";
    for (const auto& [pn, sp] : nd.properties) out << "  --%PROPERTY " << pn << ";\n";
    if (nd.main_pragma) out << "  --%MAIN;\n";
    out << "tel;\n\n";
  }
  return out.str();
}

std::optional<std::string> decimal_of_rational(const mpq_class& q) {
  mpz_class num = q.get_num();
  mpz_class den = q.get_den();
  bool neg = num < 0;
  if (neg) num = -num;
  // den must be 2^a * 5^b for a finite expansion
  mpz_class d = den;
  int a = 0, b = 0;
  while (d % 2 == 0) {
    d /= 2;
    a++;
  }
  while (d % 5 == 0) {
    d /= 5;
    b++;
  }
  if (d != 1) return std::nullopt;
  int digits = std::max(a, b);
  mpz_class scale = 1;
  for (int i = 0; i < digits; i++) scale *= 10;
  mpz_class scaled = num * scale / den;
  std::string s = scaled.get_str();
  std::string whole, frac;
  if (digits == 0) {
    whole = s;
    frac = "0";
  } else {
    if (static_cast<int>(s.size()) <= digits) s = std::string(digits + 1 - s.size(), '0') + s;
    whole = s.substr(0, s.size() - digits);
    frac = s.substr(s.size() - digits);
  }
  return (neg ? "-" : "") + whole + "." + frac;
}

std::optional<std::string> term_to_lustre(const TermRef& t) {
  // Levels as above; emit via a recursive printer over the term DAG.
  std::function<std::optional<std::string>(const TermRef&, int)> go =
      [&](const TermRef& u, int min_level) -> std::optional<std::string> {
    int level = LvlAtom;
    std::string body;
    auto emit = [&](std::initializer_list<std::pair<const TermRef*, int>> parts,
                    const std::string& sep) -> bool {
      bool first = true;
      for (const auto& [k, lvl] : parts) {
        if (!first) body += sep;
        first = false;
        auto s = go(*k, lvl);
        if (!s) return false;
        body += *s;
      }
      return true;
    };
    switch (u->kind) {
      case TermKind::Const: {
        const Value& v = u->val;
        if (v.is_bool()) {
          body = v.as_bool() ? "true" : "false";
        } else if (v.is_int()) {
          if (v.as_int() < 0) {
            level = LvlUnary;
            body = "-" + mpz_class(-v.as_int()).get_str();
          } else {
            body = v.as_int().get_str();
          }
        } else {
          auto d = decimal_of_rational(v.as_real());
          if (!d) return std::nullopt;
          if ((*d)[0] == '-') level = LvlUnary;
          body = *d;
        }
        break;
      }
      case TermKind::Var:
        if (u->tag == StepTag::Prev) {
          level = LvlUnary;
          body = "pre " + u->var;
        } else {
          body = u->var;
        }
        break;
      case TermKind::Not: {
        level = LvlNot;
        body = "not ";
        auto s = go(u->kids[0], LvlNot);
        if (!s) return std::nullopt;
        body += *s;
        break;
      }
      case TermKind::And:
      case TermKind::Or: {
        bool is_and = u->kind == TermKind::And;
        level = is_and ? LvlAnd : LvlOr;
        for (size_t i = 0; i < u->kids.size(); i++) {
          if (i) body += is_and ? " and " : " or ";
          auto s = go(u->kids[i], i == 0 ? level : level + 1);
          if (!s) return std::nullopt;
          body += *s;
        }
        break;
      }
      case TermKind::Xor:
        level = LvlOr;
        if (!emit({{&u->kids[0], LvlOr}, {&u->kids[1], LvlOr + 1}}, " xor ")) return std::nullopt;
        break;
      case TermKind::Implies:
        level = LvlImplies;
        if (!emit({{&u->kids[0], LvlImplies + 1}, {&u->kids[1], LvlImplies}}, " => "))
          return std::nullopt;
        break;
      case TermKind::Ite: {
        level = LvlArrow;
        auto c = go(u->kids[0], LvlArrow), a = go(u->kids[1], LvlArrow),
             b = go(u->kids[2], LvlArrow);
        if (!c || !a || !b) return std::nullopt;
        body = "if " + *c + " then " + *a + " else " + *b;
        break;
      }
      case TermKind::Eq:
      case TermKind::Lt:
      case TermKind::Le:
      case TermKind::Gt:
      case TermKind::Ge: {
        level = LvlCmp;
        const char* op = u->kind == TermKind::Eq   ? " = "
                         : u->kind == TermKind::Lt ? " < "
                         : u->kind == TermKind::Le ? " <= "
                         : u->kind == TermKind::Gt ? " > "
                                                   : " >= ";
        if (!emit({{&u->kids[0], LvlCmp + 1}, {&u->kids[1], LvlCmp + 1}}, op))
          return std::nullopt;
        break;
      }
      case TermKind::Add:
      case TermKind::Sub: {
        level = LvlAdd;
        if (!emit({{&u->kids[0], LvlAdd}, {&u->kids[1], LvlAdd + 1}},
                  u->kind == TermKind::Add ? " + " : " - "))
          return std::nullopt;
        break;
      }
      case TermKind::Neg: {
        level = LvlUnary;
        // Operand at atom level: parenthesizes everything compound, which
        // also keeps "-" from fusing with a following "-" into a comment.
        auto s = go(u->kids[0], LvlAtom);
        if (!s) return std::nullopt;
        body = "-" + *s;
        break;
      }
      case TermKind::Mul:
      case TermKind::Div:
      case TermKind::Mod: {
        level = LvlMul;
        const char* op = u->kind == TermKind::Mul   ? " * "
                         : u->kind == TermKind::Div ? " div "
                                                    : " mod ";
        if (!emit({{&u->kids[0], LvlMul}, {&u->kids[1], LvlMul + 1}}, op)) return std::nullopt;
        break;
      }
    }
    if (level < min_level) return "(" + body + ")";
    return body;
  };
  return go(t, LvlArrow);
}

}  // namespace minikind
