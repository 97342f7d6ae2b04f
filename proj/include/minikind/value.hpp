#pragma once

#include <gmpxx.h>

#include <string>
#include <variant>

#include "minikind/diag.hpp"

namespace minikind {

enum class Sort { Bool, Int, Real };

const char* sort_name(Sort s);

// Exact runtime value: bool, arbitrary-precision integer, or rational.
// No floating point anywhere in the checker.
class Value {
 public:
  Value() : v_(false) {}
  explicit Value(bool b) : v_(b) {}
  explicit Value(mpz_class z) : v_(std::move(z)) {}
  explicit Value(mpq_class q) : v_(std::move(q)) { std::get<mpq_class>(v_).canonicalize(); }

  static Value int_of(long n) { return Value(mpz_class(n)); }
  static Value rat_of(long p, long q);

  Sort sort() const;
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<mpz_class>(v_); }
  bool is_real() const { return std::holds_alternative<mpq_class>(v_); }

  bool as_bool() const;
  const mpz_class& as_int() const;
  const mpq_class& as_real() const;

  bool operator==(const Value& o) const { return v_ == o.v_; }
  bool operator!=(const Value& o) const { return !(*this == o); }

  // Total order within one sort (bools: false < true). Mixed sorts are a bug.
  bool less(const Value& o) const;

  // "true"/"false", decimal integer, or "p/q" (q omitted when 1).
  std::string str() const;

  size_t hash() const;

 private:
  std::variant<bool, mpz_class, mpq_class> v_;
};

// Euclidean division as in SMT-LIB2: remainder always in [0, |d|).
mpz_class euclid_div(const mpz_class& a, const mpz_class& b);
mpz_class euclid_mod(const mpz_class& a, const mpz_class& b);

}  // namespace minikind
