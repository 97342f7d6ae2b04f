#pragma once

#include <gmpxx.h>

#include <memory>
#include <string>
#include <vector>

#include "minikind/value.hpp"

namespace minikind {

enum class ExprKind { IntLit, RealLit, BoolLit, VarRef, Unary, Binary, Ite, Arrow, Pre, Call };
enum class UnOp { Not, Neg };
enum class BinOp { Add, Sub, Mul, Div, Mod, Lt, Le, Gt, Ge, Eq, Neq, And, Or, Xor, Implies };

const char* binop_name(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  ExprKind kind;
  SourceSpan span;

  // Filled in by the type checker.
  Sort sort = Sort::Bool;
  bool typed = false;

  bool bool_val = false;
  mpz_class int_val;
  mpq_class real_val;
  std::string name;  // VarRef: variable; Call: callee node
  UnOp un = UnOp::Not;
  BinOp bin = BinOp::Add;
  std::vector<ExprPtr> args;  // operands; Ite: cond/then/else, Arrow: lhs/rhs, Pre: operand
};

ExprPtr mk_expr(ExprKind k, SourceSpan span);

struct VarDecl {
  std::string name;
  Sort sort;
  SourceSpan span;
};

struct AstEquation {
  std::string lhs;
  ExprPtr rhs;
  SourceSpan span;
};

struct NodeDecl {
  std::string name;
  SourceSpan span;
  std::vector<VarDecl> inputs, outputs, locals;
  std::vector<AstEquation> equations;
  std::vector<ExprPtr> assertions;
  std::vector<std::pair<std::string, SourceSpan>> properties;
  bool main_pragma = false;

  const VarDecl* find_var(const std::string& n) const;
};

struct Program {
  std::vector<NodeDecl> nodes;
  std::string main;  // resolved by the parser

  const NodeDecl* find_node(const std::string& n) const;
  const NodeDecl& main_node() const;
};

// A Program whose every expression carries a checked sort.
using TypedProgram = Program;

}  // namespace minikind
