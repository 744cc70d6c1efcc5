#include <doctest.h>

#include <random>

#include "eqlab/errors.hpp"
#include "eqlab/normal_order.hpp"
#include "oracles.hpp"

using namespace eqlab;
using eqlab::testing::DenseSpace;

namespace {

const ScalarPoly kHbar = ScalarPoly::hbar();
const ScalarPoly kI = ScalarPoly::i();

ScalarPoly param(const char* name) { return ScalarPoly::atom(Atom::parameter(name)); }
ScalarPoly rat(long n, long d = 1) { return ScalarPoly(Rational(n, d)); }
OperatorExpr op(const Generator& g) { return OperatorExpr(g); }
ScalarPoly shift(const char* name, int n) { return ScalarPoly::atom(Atom::shift(name, n)); }

std::shared_ptr<const FiducialFrame> vacuum_frame(const ScalarPoly& omega, int modes = 1) {
  std::vector<LinearForm> forms;
  for (int n = 0; n < modes; ++n) forms.push_back({{Generator::Q(n), omega}, {Generator::P(n), kI}});
  return std::make_shared<FiducialFrame>("vac", forms);
}

std::shared_ptr<const FiducialFrame> zeta_frame(const ScalarPoly& m, const ScalarPoly& zeta, int modes = 1) {
  std::vector<LinearForm> forms;
  for (int n = 0; n < modes; ++n) {
    forms.push_back({{Generator::Q(n), m}, {Generator::S(n), m * zeta}, {Generator::P(n), kI}});
    forms.push_back({{Generator::S(n), m}, {Generator::Q(n), m * zeta}, {Generator::R(n), kI}});
  }
  return std::make_shared<FiducialFrame>("zeta", forms);
}

}  // namespace

TEST_CASE("canonicalize: single commutator and cross-mode swap") {
  const OperatorExpr pq = op(Generator::P(0)) * op(Generator::Q(0));
  CHECK(canonicalize(pq) == op(Generator::Q(0)) * op(Generator::P(0)) - OperatorExpr(kI * kHbar));
  CHECK(canonicalize(op(Generator::P(2)) * op(Generator::Q(1))) == op(Generator::Q(1)) * op(Generator::P(2)));
}

TEST_CASE("canonicalize: QPQ agrees with 4x4 matrix substitution") {
  const auto Q = op(Generator::Q(0));
  const auto P = op(Generator::P(0));
  const OperatorExpr qpq = Q * P * Q;
  const OperatorExpr expected = Q * Q * P - kI * kHbar * Q;
  CHECK(canonicalize(qpq) == expected);

  // Oracle: truncated D=4 matrices agree on columns with occupation < D - 3.
  DenseSpace space{{{OperatorSet::kPQ, 0}}, 4};
  const Binding b{{Atom::hbar(), 1.0}};
  const auto lhs = space.build(qpq, b);
  const auto rhs = space.build(expected, b);
  for (int row = 0; row < 4; ++row) CHECK(std::abs(lhs(row, 0) - rhs(row, 0)) < 1e-14);
}

TEST_CASE("canonicalize is idempotent on random expressions up to degree 6") {
  std::mt19937 rng(11);
  const std::vector<Generator> gens{Generator::Q(0), Generator::P(0), Generator::Q(1), Generator::P(1),
                                    Generator::S(0), Generator::R(0)};
  for (int trial = 0; trial < 50; ++trial) {
    const OperatorExpr e = eqlab::testing::random_expr(rng, gens, 6, 6);
    const OperatorExpr once = canonicalize(e);
    CHECK(once.canonical());
    CHECK(canonicalize(once) == once);
  }
}

TEST_CASE("canonicalize preserves the operator identity on the low-occupation block") {
  std::mt19937 rng(5);
  const std::vector<Generator> gens{Generator::Q(0), Generator::P(0), Generator::Q(1), Generator::P(1)};
  DenseSpace space{{{OperatorSet::kPQ, 0}, {OperatorSet::kPQ, 1}}, 12};
  const Binding b{{Atom::hbar(), 1.0}};
  for (int trial = 0; trial < 8; ++trial) {
    const OperatorExpr e = eqlab::testing::random_expr(rng, gens, 5, 4);
    const auto lhs = space.build(e, b);
    const auto rhs = space.build(canonicalize(e), b);
    double worst = 0.0;
    for (long col = 0; col < space.size(); ++col) {
      const auto occ = space.occupations(col);
      if (occ[0] >= 12 - 4 || occ[1] >= 12 - 4) continue;
      for (long row = 0; row < space.size(); ++row) {
        const auto rocc = space.occupations(row);
        if (rocc[0] >= 12 - 4 || rocc[1] >= 12 - 4) continue;
        worst = std::max(worst, std::abs(lhs(row, col) - rhs(row, col)));
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("hermitian_check") {
  const auto Q = op(Generator::Q(0));
  const auto P = op(Generator::P(0));
  const auto omega = param("omega");
  CHECK(hermitian_check(P * P + omega * omega * Q * Q));
  CHECK_FALSE(hermitian_check(Q * P));
  CHECK(hermitian_check(rat(1, 2) * (Q * P + P * Q)));
  CHECK(hermitian_check(kI * (Q * P - P * Q)));
}

TEST_CASE("displace expands binomially") {
  const auto Q = op(Generator::Q(0));
  const auto P = op(Generator::P(0));
  const auto q = shift("q", 0);
  const auto p = shift("p", 0);
  CHECK(displace(Q * Q, {{Generator::Q(0), q}}) == Q * Q + rat(2) * q * Q + OperatorExpr(q * q));
  CHECK(displace(P, {{Generator::P(0), p}}) == P + OperatorExpr(p));
}

TEST_CASE("displace of a two-set square matches matrix substitution") {
  const auto zeta = rat(1, 2);
  const OperatorExpr x = op(Generator::Q(0)) + zeta * op(Generator::S(0));
  const auto q = shift("q", 0);
  const OperatorExpr shifted = displace(x * x, {{Generator::Q(0), q}});
  const OperatorExpr expected = x * x + rat(2) * q * x + OperatorExpr(q * q);
  CHECK(canonicalize(shifted) == canonicalize(expected));

  // Matrix oracle at D=8 with q bound to 0.7: displacing Q by q*1 as matrices.
  DenseSpace space{{{OperatorSet::kPQ, 0}, {OperatorSet::kRS, 0}}, 8};
  Binding b{{Atom::hbar(), 1.0}, {Atom::shift("q", 0), 0.7}};
  const auto qm = space.generator(Generator::Q(0));
  const auto sm = space.generator(Generator::S(0));
  const auto id = eqlab::testing::DenseMatrix::Identity(space.size(), space.size());
  const eqlab::testing::DenseMatrix xm = (qm + 0.7 * id) + 0.5 * sm;
  CHECK((space.build(shifted, b) - xm * xm).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("frame: vacuum Gram and inverse") {
  const auto omega = param("omega");
  const auto f = vacuum_frame(omega);
  CHECK(f->gram()[0][0] == rat(2) * omega);
  const auto& ex = f->expansion(Generator::Q(0));
  CHECK(ex.annihilation[0] == rat(1, 2) * *omega.inverse());
  CHECK(ex.creation[0] == rat(1, 2) * *omega.inverse());
  CHECK_THROWS_WITH_AS(f->expansion(Generator::Q(1)), doctest::Contains("outside the span"), Error);
}

TEST_CASE("frame: zeta Gram per mode pair is [[1, zeta], [zeta, 1]]") {
  const auto f = zeta_frame(rat(1), rat(1, 2));
  const auto g = f->normalized_gram();
  REQUIRE(g);
  CHECK((*g)[0][0] == rat(1));
  CHECK((*g)[0][1] == rat(1, 2));
  CHECK((*g)[1][0] == rat(1, 2));
  CHECK((*g)[1][1] == rat(1));
  CHECK(f->gram()[0][1] == rat(1));  // raw: 2 m zeta

  for (const char* z : {"1", "11/10", "-1"}) {
    try {
      zeta_frame(rat(1), ScalarPoly(*parse_rational(z)));
      FAIL("expected rejection for zeta = " << z);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kGramNotPositiveDefinite);
    }
  }
  CHECK_NOTHROW(zeta_frame(rat(1), rat(9, 10)));
  CHECK_NOTHROW(zeta_frame(param("m"), rat(1, 3)));
}

TEST_CASE("frame: symbolic zeta needs binding, non-commuting frames rejected") {
  try {
    zeta_frame(rat(1), param("zeta"));
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::kGramNotPositiveDefinite || e.kind() == ErrorKind::kFrameInversion));
  }
  std::vector<LinearForm> bad{{{Generator::Q(0), rat(1)}, {Generator::P(0), kI}},
                              {{Generator::Q(0), rat(1)}, {Generator::P(0), -kI}}};
  CHECK_THROWS_AS(FiducialFrame("bad", bad), Error);
}

TEST_CASE("normal_order: the quadratic factorization with constant hbar m0") {
  const auto m0 = param("m0");
  const auto Q = op(Generator::Q(0));
  const auto P = op(Generator::P(0));
  const auto f = vacuum_frame(m0);
  const OperatorExpr h = P * P + m0 * m0 * Q * Q;
  const NormalOrderedExpr n = normal_order(h, f);

  // (m0 Q + i P) is b; 2 hbar m0 a^dag a = b^dag b / m0 * ... in raw letters:
  // b^dag b = P^2 + m0^2 Q^2 - hbar m0, so h = b^dag b + hbar m0.
  NormalOrderedExpr expected(f);
  expected.add_term({{true, 0}, {false, 0}}, ScalarPoly(1));
  expected.add_term({}, kHbar * m0);
  CHECK(n == expected);

  // (m0 Q - i P)(m0 Q + i P) = P^2 + m0^2 Q^2 - hbar m0 = :P^2 + m0^2 Q^2:
  const OperatorExpr product = (m0 * Q - kI * P) * (m0 * Q + kI * P);
  CHECK(canonicalize(product) == canonicalize(h - OperatorExpr(kHbar * m0)));
  CHECK(to_operator(wick(h, f)) == canonicalize(product));
  CHECK(to_operator(n) == canonicalize(h));
}

TEST_CASE("normal_order: scalars and the defining reorder rule") {
  const auto f = vacuum_frame(rat(1));
  const auto c = rat(3, 7) * kHbar;
  CHECK(normal_order(OperatorExpr(c), f).scalar_part() == c);
  CHECK(normal_order(OperatorExpr(c), f).terms().size() == 1);

  // b b^dag = b^dag b + M_11 hbar with b = Q + iP.
  const auto b = op(Generator::Q(0)) + kI * op(Generator::P(0));
  const auto bd = op(Generator::Q(0)) - kI * op(Generator::P(0));
  NormalOrderedExpr expected(f);
  expected.add_term({{true, 0}, {false, 0}}, ScalarPoly(1));
  expected.add_term({}, f->gram()[0][0] * kHbar);
  CHECK(normal_order(b * bd, f) == expected);
}

TEST_CASE("normal_order rejects generators outside the frame") {
  const auto f = vacuum_frame(rat(1));
  try {
    normal_order(op(Generator::Q(1)), f);
    FAIL("expected FrameSpanError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kFrameSpan);
  }
}

TEST_CASE("normal_order round-trips and is adjoint covariant") {
  std::mt19937 rng(17);
  const auto f = zeta_frame(rat(2), rat(1, 3));
  const std::vector<Generator> gens{Generator::Q(0), Generator::P(0), Generator::S(0), Generator::R(0)};
  for (int trial = 0; trial < 20; ++trial) {
    const OperatorExpr e = eqlab::testing::random_expr(rng, gens, 4, 4);
    const NormalOrderedExpr n = normal_order(e, f);
    CHECK(canonicalize(to_operator(n) - e).is_zero());
    CHECK(canonicalize(to_operator(adjoint(n)) - adjoint(e)).is_zero());
    CHECK(adjoint(n) == normal_order(adjoint(e), f));
  }
}

TEST_CASE("fiducial_expectation needs a frame") {
  try {
    fiducial_expectation(op(Generator::Q(0)));
    FAIL("expected NotNormalOrderedError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotNormalOrdered);
  }
  const auto f = vacuum_frame(param("m0"));
  const auto c = kHbar * param("m0");
  CHECK(fiducial_expectation(normal_order(OperatorExpr(c), f)) == c);
}

TEST_CASE("fiducial_expectation of the displaced quadratic is classical") {
  const auto m0 = param("m0");
  const auto f = vacuum_frame(m0);
  const auto Q = op(Generator::Q(0));
  const auto P = op(Generator::P(0));
  const NormalOrderedExpr n = wick(P * P + m0 * m0 * Q * Q, f);
  const auto p = shift("p", 0);
  const auto q = shift("q", 0);
  const ShiftMap shifts{{Generator::Q(0), q}, {Generator::P(0), p}};
  CHECK(fiducial_expectation(displace(n, shifts)) == p * p + m0 * m0 * q * q);
}

TEST_CASE("wcp_symbolic: harmonic oscillator and quartic") {
  const auto omega = param("omega");
  const auto f = vacuum_frame(omega);
  const auto Q = op(Generator::Q(0));
  const auto P = op(Generator::P(0));
  const auto p = shift("p", 0);
  const auto q = shift("q", 0);
  const std::set<OperatorSet> pq{OperatorSet::kPQ};

  const OperatorExpr h = rat(1, 2) * (P * P + omega * omega * Q * Q);
  CHECK(wcp_symbolic(h, f, pq) == rat(1, 2) * (p * p + omega * omega * q * q) + rat(1, 2) * kHbar * omega);

  const auto inv = *omega.inverse();
  CHECK(wcp_symbolic(Q * Q * Q * Q, f, pq) ==
        q.pow(4) + rat(3) * q * q * kHbar * inv + rat(3, 4) * kHbar * kHbar * inv * inv);

  try {
    wcp_symbolic(Q * P, f, pq);
    FAIL("expected HermiticityError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kHermiticity);
  }
}

TEST_CASE("wcp_symbolic: quadratic plus w-quartic for N = 2") {
  const auto m0 = param("m0");
  const auto w = param("w");
  const auto f = vacuum_frame(m0, 2);
  OperatorExpr quad;
  ScalarPoly classical_quad;
  for (int n = 0; n < 2; ++n) {
    quad += op(Generator::P(n)) * op(Generator::P(n)) + m0 * m0 * op(Generator::Q(n)) * op(Generator::Q(n));
    classical_quad += shift("p", n) * shift("p", n) + m0 * m0 * shift("q", n) * shift("q", n);
  }
  const OperatorExpr h = rat(1, 2) * to_operator(wick(quad, f)) + w * to_operator(wick(quad * quad, f));
  const ScalarPoly expected = rat(1, 2) * classical_quad + w * classical_quad * classical_quad;
  CHECK(wcp_symbolic(h, f, {OperatorSet::kPQ}) == expected);
}

TEST_CASE("classical substitution theorem for normal-ordered input") {
  std::mt19937 rng(23);
  const auto f = zeta_frame(rat(1), rat(1, 2));
  const std::vector<Generator> gens{Generator::Q(0), Generator::P(0), Generator::S(0), Generator::R(0)};
  for (int trial = 0; trial < 10; ++trial) {
    OperatorExpr raw = eqlab::testing::random_expr(rng, gens, 4, 4, false);
    raw = (raw + adjoint(raw)) * rat(1, 2);
    const OperatorExpr f_op = to_operator(wick(raw, f));
    ShiftMap values = phase_space_shifts(f->span(), {OperatorSet::kPQ});
    CHECK(wcp_symbolic(f_op, f, {OperatorSet::kPQ}) == classical_substitution(raw, values));
  }
}
