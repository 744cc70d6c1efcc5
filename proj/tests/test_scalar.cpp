#include <doctest.h>

#include "eqlab/errors.hpp"
#include "eqlab/scalar.hpp"

using namespace eqlab;

TEST_CASE("rationals parse exactly") {
  CHECK(*parse_rational("3/4") == Rational(3, 4));
  CHECK(*parse_rational("-6/8") == Rational(-3, 4));
  CHECK(*parse_rational("7") == Rational(7));
  CHECK_FALSE(parse_rational("1/0"));
  CHECK_FALSE(parse_rational("0.5"));
  CHECK_FALSE(parse_rational(""));
  CHECK_FALSE(parse_rational("/2"));
}

TEST_CASE("complex rational arithmetic") {
  const ComplexRational i = ComplexRational::i();
  CHECK(i * i == ComplexRational(-1));
  CHECK((ComplexRational(1) / (ComplexRational(1) + i)) == ComplexRational(Rational(1, 2), Rational(-1, 2)));
  CHECK_THROWS_AS(ComplexRational(1) / ComplexRational(0), Error);
}

TEST_CASE("scalar polynomials have a canonical form") {
  const auto hbar = ScalarPoly::hbar();
  const auto w = ScalarPoly::atom(Atom::parameter("omega"));
  const ScalarPoly a = hbar * w + w * hbar;
  CHECK(a == ScalarPoly(2) * w * hbar);
  CHECK((a - a).is_zero());
  CHECK(((hbar + 1) * (hbar - 1)) == hbar.pow(2) - 1);
  CHECK(to_string(ScalarPoly(Rational(1, 2)) * hbar * w) == "1/2*hbar*omega");
}

TEST_CASE("laurent monomials invert and differentiate") {
  const auto w = ScalarPoly::atom(Atom::parameter("omega"));
  const auto inv = w.inverse();
  REQUIRE(inv);
  CHECK(*inv * w == ScalarPoly(1));
  CHECK_FALSE((w + 1).inverse());
  const Atom q = Atom::shift("q", 0);
  const auto qq = ScalarPoly::atom(q);
  CHECK((qq.pow(3)).derivative(q) == ScalarPoly(3) * qq.pow(2));
  CHECK(to_string(ScalarPoly(Rational(3, 4)) * ScalarPoly::hbar().pow(2) * inv->pow(2)) == "3/4*hbar^2/omega^2");
}

TEST_CASE("evaluation needs every atom bound") {
  const auto p = ScalarPoly::atom(Atom::parameter("m"));
  Binding b;
  CHECK_THROWS_AS(p.evaluate(b), Error);
  b[Atom::parameter("m")] = 2.0;
  CHECK(((p * p) + ScalarPoly::i()).evaluate(b) == std::complex<double>(4.0, 1.0));
}
