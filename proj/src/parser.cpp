#include "minikind/parser.hpp"

#include <fstream>
#include <sstream>

namespace minikind {

const char* binop_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "div";
    case BinOp::Mod: return "mod";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "=";
    case BinOp::Neq: return "<>";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Xor: return "xor";
    case BinOp::Implies: return "=>";
  }
  return "?";
}

ExprPtr mk_expr(ExprKind k, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->span = std::move(span);
  return e;
}

const VarDecl* NodeDecl::find_var(const std::string& n) const {
  for (const auto* group : {&inputs, &outputs, &locals})
    for (const auto& v : *group)
      if (v.name == n) return &v;
  return nullptr;
}

const NodeDecl* Program::find_node(const std::string& n) const {
  for (const auto& nd : nodes)
    if (nd.name == n) return &nd;
  return nullptr;
}

const NodeDecl& Program::main_node() const {
  const NodeDecl* nd = find_node(main);
  if (!nd) throw ParseError({}, "program has no main node");
  return *nd;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

  Program program() {
    Program p;
    while (!at(Tok::End)) p.nodes.push_back(node());
    resolve_main(p);
    return p;
  }

  ExprPtr expression_only() {
    ExprPtr e = expr();
    expect(Tok::End);
    return e;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool at(Tok k) const { return cur().kind == k; }

  const Token& advance() { return toks_[pos_++]; }

  const Token& expect(Tok k) {
    if (!at(k))
      throw ParseError(cur().span,
                       std::string("expected ") + tok_name(k) + ", got " + tok_name(cur().kind));
    return advance();
  }

  bool accept(Tok k) {
    if (!at(k)) return false;
    pos_++;
    return true;
  }

  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError(cur().span, "expected " + expected + ", got " + tok_name(cur().kind));
  }

  Sort type_name() {
    if (accept(Tok::KwBool)) return Sort::Bool;
    if (accept(Tok::KwInt)) return Sort::Int;
    if (accept(Tok::KwReal)) return Sort::Real;
    fail("a type ('bool', 'int' or 'real')");
  }

  // one group: a, b : int
  void var_group(std::vector<VarDecl>& out) {
    std::vector<Token> names;
    names.push_back(expect(Tok::Ident));
    while (accept(Tok::Comma)) names.push_back(expect(Tok::Ident));
    expect(Tok::Colon);
    Sort s = type_name();
    for (const auto& t : names) out.push_back({t.text, s, t.span});
  }

  // ( group ; group ; ... )  — possibly empty
  void param_list(std::vector<VarDecl>& out) {
    expect(Tok::LParen);
    if (!at(Tok::RParen)) {
      var_group(out);
      while (accept(Tok::Semi)) {
        if (at(Tok::RParen)) break;  // trailing semicolon
        var_group(out);
      }
    }
    expect(Tok::RParen);
  }

  NodeDecl node() {
    NodeDecl nd;
    nd.span = cur().span;
    expect(Tok::KwNode);
    nd.name = expect(Tok::Ident).text;
    param_list(nd.inputs);
    expect(Tok::KwReturns);
    param_list(nd.outputs);
    accept(Tok::Semi);
    if (accept(Tok::KwVar)) {
      // one or more "group ;" entries, up to 'let'
      do {
        var_group(nd.locals);
        expect(Tok::Semi);
      } while (!at(Tok::KwLet));
    }
    expect(Tok::KwLet);
    while (!accept(Tok::KwTel)) statement(nd);
    accept(Tok::Semi);
    return nd;
  }

  void statement(NodeDecl& nd) {
    if (accept(Tok::KwAssert)) {
      nd.assertions.push_back(expr());
      expect(Tok::Semi);
      return;
    }
    if (at(Tok::PragmaProperty)) {
      advance();
      const Token& id = expect(Tok::Ident);
      nd.properties.emplace_back(id.text, id.span);
      expect(Tok::Semi);
      return;
    }
    if (at(Tok::PragmaMain)) {
      advance();
      expect(Tok::Semi);
      nd.main_pragma = true;
      return;
    }
    if (at(Tok::Ident)) {
      const Token& lhs = advance();
      expect(Tok::Eq);
      AstEquation eq;
      eq.lhs = lhs.text;
      eq.rhs = expr();
      const Token& semi = expect(Tok::Semi);
      eq.span = SourceSpan::join(lhs.span, semi.span);
      nd.equations.push_back(std::move(eq));
      return;
    }
    fail("an equation, 'assert', a pragma, or 'tel'");
  }

  // Precedence, loosest first: if/->; =>; or/xor; and; not; comparisons;
  // +/-; * div mod; unary -/pre; primary.
  ExprPtr expr() {
    if (at(Tok::KwIf)) {
      SourceSpan start = cur().span;
      advance();
      ExprPtr c = expr();
      expect(Tok::KwThen);
      ExprPtr t = expr();
      expect(Tok::KwElse);
      ExprPtr e = expr();
      ExprPtr ite = mk_expr(ExprKind::Ite, SourceSpan::join(start, e->span));
      ite->args = {c, t, e};
      return ite;
    }
    ExprPtr lhs = implies_expr();
    if (accept(Tok::Arrow)) {
      ExprPtr rhs = expr();  // right-associative, same level as ite
      ExprPtr a = mk_expr(ExprKind::Arrow, SourceSpan::join(lhs->span, rhs->span));
      a->args = {lhs, rhs};
      return a;
    }
    return lhs;
  }

  ExprPtr implies_expr() {
    ExprPtr lhs = or_expr();
    if (accept(Tok::Implies)) {
      ExprPtr rhs = implies_expr();  // right-associative
      return binary(BinOp::Implies, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    for (;;) {
      if (accept(Tok::KwOr)) {
        lhs = binary(BinOp::Or, lhs, and_expr());
      } else if (accept(Tok::KwXor)) {
        lhs = binary(BinOp::Xor, lhs, and_expr());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (accept(Tok::KwAnd)) lhs = binary(BinOp::And, lhs, not_expr());
    return lhs;
  }

  ExprPtr not_expr() {
    if (at(Tok::KwNot)) {
      SourceSpan start = cur().span;
      advance();
      ExprPtr a = not_expr();
      ExprPtr e = mk_expr(ExprKind::Unary, SourceSpan::join(start, a->span));
      e->un = UnOp::Not;
      e->args = {a};
      return e;
    }
    return cmp_expr();
  }

  ExprPtr cmp_expr() {
    ExprPtr lhs = add_expr();
    BinOp op;
    if (accept(Tok::Lt)) op = BinOp::Lt;
    else if (accept(Tok::Le)) op = BinOp::Le;
    else if (accept(Tok::Gt)) op = BinOp::Gt;
    else if (accept(Tok::Ge)) op = BinOp::Ge;
    else if (accept(Tok::Eq)) op = BinOp::Eq;
    else if (accept(Tok::Neq)) op = BinOp::Neq;
    else return lhs;
    return binary(op, lhs, add_expr());  // non-associative
  }

  ExprPtr add_expr() {
    ExprPtr lhs = mul_expr();
    for (;;) {
      if (accept(Tok::Plus)) {
        lhs = binary(BinOp::Add, lhs, mul_expr());
      } else if (accept(Tok::Minus)) {
        lhs = binary(BinOp::Sub, lhs, mul_expr());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr mul_expr() {
    ExprPtr lhs = unary_expr();
    for (;;) {
      if (accept(Tok::Star)) {
        lhs = binary(BinOp::Mul, lhs, unary_expr());
      } else if (accept(Tok::KwDiv)) {
        lhs = binary(BinOp::Div, lhs, unary_expr());
      } else if (accept(Tok::KwMod)) {
        lhs = binary(BinOp::Mod, lhs, unary_expr());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr unary_expr() {
    if (at(Tok::Minus)) {
      SourceSpan start = cur().span;
      advance();
      ExprPtr a = unary_expr();
      ExprPtr e = mk_expr(ExprKind::Unary, SourceSpan::join(start, a->span));
      e->un = UnOp::Neg;
      e->args = {a};
      return e;
    }
    if (at(Tok::KwPre)) {
      SourceSpan start = cur().span;
      advance();
      ExprPtr a = unary_expr();
      ExprPtr e = mk_expr(ExprKind::Pre, SourceSpan::join(start, a->span));
      e->args = {a};
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::IntLit: {
        advance();
        ExprPtr e = mk_expr(ExprKind::IntLit, t.span);
        e->int_val = t.int_val;
        return e;
      }
      case Tok::RealLit: {
        advance();
        ExprPtr e = mk_expr(ExprKind::RealLit, t.span);
        e->real_val = t.real_val;
        return e;
      }
      case Tok::KwTrue:
      case Tok::KwFalse: {
        advance();
        ExprPtr e = mk_expr(ExprKind::BoolLit, t.span);
        e->bool_val = (t.kind == Tok::KwTrue);
        return e;
      }
      case Tok::Ident: {
        advance();
        if (at(Tok::LParen)) {
          advance();
          ExprPtr e = mk_expr(ExprKind::Call, t.span);
          e->name = t.text;
          if (!at(Tok::RParen)) {
            e->args.push_back(expr());
            while (accept(Tok::Comma)) e->args.push_back(expr());
          }
          const Token& close = expect(Tok::RParen);
          e->span = SourceSpan::join(t.span, close.span);
          return e;
        }
        ExprPtr e = mk_expr(ExprKind::VarRef, t.span);
        e->name = t.text;
        return e;
      }
      case Tok::LParen: {
        advance();
        ExprPtr e = expr();
        expect(Tok::RParen);
        return e;
      }
      default: fail("an expression");
    }
  }

  ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
    ExprPtr e = mk_expr(ExprKind::Binary, SourceSpan::join(lhs->span, rhs->span));
    e->bin = op;
    e->args = {std::move(lhs), std::move(rhs)};
    return e;
  }

  void resolve_main(Program& p) {
    if (p.nodes.empty()) throw ParseError(cur().span, "empty program: no nodes declared");
    const NodeDecl* pragma = nullptr;
    for (const auto& nd : p.nodes) {
      if (!nd.main_pragma) continue;
      if (pragma)
        throw ParseError(nd.span, "--%MAIN declared in both '" + pragma->name + "' and '" +
                                      nd.name + "'");
      pragma = &nd;
    }
    if (pragma) {
      p.main = pragma->name;
      return;
    }
    if (p.find_node("main")) {
      p.main = "main";
      return;
    }
    if (p.nodes.size() == 1) {
      p.main = p.nodes[0].name;
      return;
    }
    throw ParseError(p.nodes[0].span,
                     "cannot determine main node: use --%MAIN or name a node 'main'");
  }

  const std::vector<Token>& toks_;
  size_t pos_ = 0;
};

}  // namespace

Program parse(const std::vector<Token>& tokens) { return Parser(tokens).program(); }

ExprPtr parse_expression(const std::vector<Token>& tokens) {
  return Parser(tokens).expression_only();
}

Program parse_source(const std::string& source, const std::string& filename) {
  return parse(lex(source, filename));
}

Program parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string base = path;
  size_t slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  return parse_source(ss.str(), base);
}

}  // namespace minikind
