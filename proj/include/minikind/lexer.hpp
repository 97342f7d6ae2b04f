#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

#include "minikind/diag.hpp"

namespace minikind {

enum class Tok {
  Ident,
  IntLit,
  RealLit,
  // keywords
  KwNode,
  KwReturns,
  KwVar,
  KwLet,
  KwTel,
  KwBool,
  KwInt,
  KwReal,
  KwIf,
  KwThen,
  KwElse,
  KwNot,
  KwAnd,
  KwOr,
  KwXor,
  KwDiv,
  KwMod,
  KwPre,
  KwTrue,
  KwFalse,
  KwAssert,
  // punctuation / operators
  LParen,
  RParen,
  Colon,
  Semi,
  Comma,
  Eq,
  Neq,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Arrow,
  Implies,
  // pragmas
  PragmaProperty,
  PragmaMain,
  End,
};

const char* tok_name(Tok t);

struct Token {
  Tok kind;
  std::string text;
  mpz_class int_val;
  mpq_class real_val;
  SourceSpan span;
};

struct LexOptions {
  // Advice files use flattened names: identifiers may contain `.` and may
  // start with `%` (generated names like %init).
  bool flat_idents = false;
};

std::vector<Token> lex(const std::string& source, const std::string& filename,
                       const LexOptions& opts = {});

}  // namespace minikind
