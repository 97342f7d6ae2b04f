#include "doctest.h"
#include "minikind/value.hpp"

using namespace minikind;

TEST_SUITE_BEGIN("value");

TEST_CASE("euclidean division matches SMT-LIB semantics") {
  // -7 div 2 = -4 and -7 mod 2 = 1; remainder is always non-negative.
  CHECK(euclid_div(-7, 2) == -4);
  CHECK(euclid_mod(-7, 2) == 1);
  CHECK(euclid_div(7, 2) == 3);
  CHECK(euclid_mod(7, 2) == 1);
  CHECK(euclid_div(-7, -2) == 4);
  CHECK(euclid_mod(-7, -2) == 1);
  CHECK(euclid_div(7, -2) == -3);
  CHECK(euclid_mod(7, -2) == 1);
  CHECK(euclid_div(6, 3) == 2);
  CHECK(euclid_mod(6, 3) == 0);

  for (long a = -20; a <= 20; a++) {
    for (long b : {-5L, -3L, -2L, -1L, 1L, 2L, 3L, 5L}) {
      mpz_class q = euclid_div(a, b), r = euclid_mod(a, b);
      CHECK(q * b + r == a);
      CHECK(r >= 0);
      CHECK(r < abs(mpz_class(b)));
    }
  }
}

TEST_CASE("value string forms") {
  CHECK(Value(true).str() == "true");
  CHECK(Value(false).str() == "false");
  CHECK(Value(mpz_class(-42)).str() == "-42");
  CHECK(Value::rat_of(1, 2).str() == "1/2");
  CHECK(Value::rat_of(4, 2).str() == "2");
  CHECK(Value::rat_of(-3, 6).str() == "-1/2");
}

TEST_CASE("value ordering and equality") {
  CHECK(Value(false).less(Value(true)));
  CHECK(Value::int_of(2).less(Value::int_of(3)));
  CHECK(Value::rat_of(1, 3).less(Value::rat_of(1, 2)));
  CHECK(Value::rat_of(2, 4) == Value::rat_of(1, 2));
  CHECK_THROWS_AS(Value::int_of(1).less(Value::rat_of(1, 2)), SortError);
}

TEST_SUITE_END();
