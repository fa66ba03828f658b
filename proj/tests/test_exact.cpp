#include "todalab/exact.hpp"

#include <doctest.h>

using namespace todalab;

TEST_CASE("fraction strings always carry a denominator") {
  CHECK(to_fraction_string(Rational(3)) == "3/1");
  CHECK(to_fraction_string(Rational(-2, 6)) == "-1/3");
  CHECK(to_fraction_string(Rational(0)) == "0/1");
}

TEST_CASE("nullspace of a rank-deficient matrix") {
  // rows (1 2 3), (2 4 6), (1 1 1): kernel spanned by (1, -2, 1)
  const RationalMatrix m = to_rational({{1, 2, 3}, {2, 4, 6}, {1, 1, 1}});
  const auto ns = nullspace(m);
  REQUIRE(ns.size() == 1);
  const auto& v = ns[0];
  CHECK(v[1] == -2 * v[0]);
  CHECK(v[2] == v[0]);
  for (const auto& x : multiply(m, v)) CHECK(x == 0);
}

TEST_CASE("nullspace of an invertible matrix is trivial") {
  CHECK(nullspace(to_rational({{2, -1}, {-1, 2}})).empty());
}

TEST_CASE("exact inverse") {
  const RationalMatrix m = to_rational({{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}});
  const auto inv = inverse(m);
  REQUIRE(inv);
  // inverse of the A3 Cartan matrix, by hand: (1/4) [[3,2,1],[2,4,2],[1,2,3]]
  const int expect[3][3] = {{3, 2, 1}, {2, 4, 2}, {1, 2, 3}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK((*inv)[i][j] == Rational(expect[i][j]) / 4);
  CHECK_FALSE(inverse(to_rational({{1, 2}, {2, 4}})));
}

TEST_CASE("transpose and products") {
  const RationalMatrix a = to_rational({{1, 2}, {3, 4}});
  const auto at = transpose(a);
  CHECK(at[0][1] == 3);
  const auto p = multiply(a, at);
  CHECK(p[0][0] == 5);
  CHECK(p[0][1] == 11);
  CHECK(p[1][1] == 25);
  const auto d = to_double({Rational(1, 4), Rational(-3, 2)});
  CHECK(d[0] == 0.25);
  CHECK(d[1] == -1.5);
}
