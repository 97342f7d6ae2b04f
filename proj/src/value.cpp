#include "minikind/value.hpp"

#include <functional>

namespace minikind {

const char* sort_name(Sort s) {
  switch (s) {
    case Sort::Bool: return "bool";
    case Sort::Int: return "int";
    case Sort::Real: return "real";
  }
  return "?";
}

std::string SourceSpan::str() const {
  if (!valid()) return file;
  std::string s = file.empty() ? "" : file + ":";
  s += std::to_string(line) + ":" + std::to_string(col);
  return s;
}

SourceSpan SourceSpan::join(const SourceSpan& a, const SourceSpan& b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  SourceSpan r = a;
  if (b.line < a.line || (b.line == a.line && b.col < a.col)) {
    r.line = b.line;
    r.col = b.col;
  }
  if (b.end_line > a.end_line || (b.end_line == a.end_line && b.end_col > a.end_col)) {
    r.end_line = b.end_line;
    r.end_col = b.end_col;
  }
  return r;
}

Value Value::rat_of(long p, long q) {
  mpq_class r(p, q);
  r.canonicalize();
  return Value(r);
}

Sort Value::sort() const {
  if (is_bool()) return Sort::Bool;
  if (is_int()) return Sort::Int;
  return Sort::Real;
}

bool Value::as_bool() const {
  if (!is_bool()) throw SortError("expected bool value, got " + str());
  return std::get<bool>(v_);
}

const mpz_class& Value::as_int() const {
  if (!is_int()) throw SortError("expected int value, got " + str());
  return std::get<mpz_class>(v_);
}

const mpq_class& Value::as_real() const {
  if (!is_real()) throw SortError("expected real value, got " + str());
  return std::get<mpq_class>(v_);
}

bool Value::less(const Value& o) const {
  if (is_bool() && o.is_bool()) return !as_bool() && o.as_bool();
  if (is_int() && o.is_int()) return as_int() < o.as_int();
  if (is_real() && o.is_real()) return as_real() < o.as_real();
  throw SortError("comparing values of different sorts");
}

std::string Value::str() const {
  if (is_bool()) return as_bool() ? "true" : "false";
  if (is_int()) return as_int().get_str();
  const mpq_class& q = as_real();
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

size_t Value::hash() const {
  std::hash<std::string> h;
  if (is_bool()) return as_bool() ? 0x9e3779b9u : 0x85ebca6bu;
  return h(str());
}

mpz_class euclid_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q, r;
  mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  if (r < 0) q += (b > 0) ? -1 : 1;
  return q;
}

mpz_class euclid_mod(const mpz_class& a, const mpz_class& b) {
  mpz_class r = a - b * euclid_div(a, b);
  return r;
}

}  // namespace minikind
