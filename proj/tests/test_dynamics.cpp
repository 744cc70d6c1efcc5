#include <doctest.h>

#include <cmath>

#include "eqlab/correspondence.hpp"
#include "eqlab/dsl/parser.hpp"
#include "eqlab/dynamics.hpp"
#include "eqlab/errors.hpp"

using namespace eqlab;
using namespace eqlab::dynamics;

namespace {

dsl::CheckedModel load(const std::string& text) {
  auto r = dsl::parse_model(text);
  REQUIRE(r.ok());
  return dsl::validate(*r.model);
}

const Atom kP = Atom::shift("p", 0);
const Atom kQ = Atom::shift("q", 0);

ScalarPoly sp(const Atom& a) { return ScalarPoly::atom(a); }

ScalarPoly harmonic() { return ScalarPoly(Rational(1, 2)) * (sp(kP) * sp(kP) + sp(kQ) * sp(kQ)); }

const char* kQuartic = "param hbar = 1\nparam omega = 1\nparam lambda = 1/10\nH = 1/2*(P[0]^2 + Q[0]^2) + lambda*Q[0]^4\n";

}  // namespace

TEST_CASE("reduced harmonic oscillator follows cos and sin") {
  const ReducedSystem sys(harmonic(), {{kP, kQ}}, {});
  CHECK(sys.separable());
  const auto tr = reduced_evolve(sys, {0.0}, {1.0}, {1e-2, 10.0});
  REQUIRE(tr.t.size() == 1001);
  double worst = 0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    worst = std::max(worst, std::abs(tr.q[i][0] - std::cos(tr.t[i])));
    worst = std::max(worst, std::abs(tr.p[i][0] + std::sin(tr.t[i])));
  }
  CHECK(worst <= 1e-8);
  CHECK(tr.energy_drift() <= 1e-8);
}

TEST_CASE("reduced dynamics is time reversible") {
  const ScalarPoly quartic = harmonic() + ScalarPoly(Rational(1, 10)) * sp(kQ).pow(4);
  const ScalarPoly mixed = harmonic() + ScalarPoly(Rational(1, 5)) * sp(kP) * sp(kP) * sp(kQ) * sp(kQ);
  for (const auto& h : {quartic, mixed}) {
    const ReducedSystem sys(h, {{kP, kQ}}, {});
    std::vector<double> p{0.3}, q{-0.8};
    for (int k = 0; k < 500; ++k) sys.step(p, q, 1e-2);
    for (int k = 0; k < 500; ++k) sys.step(p, q, -1e-2);
    CHECK(std::abs(p[0] - 0.3) <= 1e-6);
    CHECK(std::abs(q[0] + 0.8) <= 1e-6);
  }
  CHECK_FALSE(ReducedSystem(mixed, {{kP, kQ}}, {}).separable());
}

TEST_CASE("reduced energy is conserved without secular growth") {
  const auto model = load(R"(param hbar = 1
param m = 1
param zeta = 1/2
param v = 1
set pq 1
set rs 1
frame zf { m*(Q[0] + zeta*S[0]) + i*P[0], m*(S[0] + zeta*Q[0]) + i*R[0] }
fiducial zf
H = 1/2*:[P[0]^2 + m^2*(Q[0] + zeta*S[0])^2]: @zf + 1/2*:[R[0]^2 + m^2*(S[0] + zeta*Q[0])^2]: @zf + v*:[(R[0]^2 + m^2*(S[0] + zeta*Q[0])^2)^2]: @zf
)");
  const auto sys = correspondence::reduced_system(model);
  const auto tr = reduced_evolve(sys, {0.5}, {1.0}, {1e-2, 50.0});
  CHECK(tr.energy_drift() <= 1e-8);

  const ReducedSystem mixed(harmonic() + ScalarPoly(Rational(1, 5)) * sp(kP) * sp(kP) * sp(kQ) * sp(kQ),
                            {{kP, kQ}}, {});
  const auto tm = reduced_evolve(mixed, {0.5}, {1.0}, {1e-2, 50.0});
  CHECK(tm.energy_drift() <= 1e-8);
  // Non-secular: the second half drifts no more than the first half allows.
  auto window = [&](std::size_t a, std::size_t b) {
    double m = 0;
    for (std::size_t i = a; i < b; ++i) m = std::max(m, std::abs(tm.energy[i] - tm.energy[0]));
    return m;
  };
  const std::size_t half = tm.energy.size() / 2;
  CHECK(window(half, tm.energy.size()) <= 10 * window(0, half) + 1e-14);
}

TEST_CASE("Schrodinger evolution: stationary vacuum and Ehrenfest oscillation") {
  const auto model = load("param hbar = 1\nparam omega = 1\nH = 1/2*(P[0]^2 + omega^2*Q[0]^2)\n");
  const auto nm = correspondence::prepare(model);
  Observables obs{fock::build_generators(nm.space, 0)};

  const auto still = schrodinger_evolve(nm.hamiltonian, nm.fiducial.state, {1e-2, 10.0}, obs, 1.0);
  double worst = 0;
  for (const auto& q : still.q_exp) worst = std::max(worst, std::abs(q[0]));
  CHECK(worst <= 1e-10);

  const auto ev = correspondence::evolve_model(model, {{0.0}, {1.0}}, {1e-2, 10.0});
  double dev = 0;
  for (std::size_t i = 0; i < ev.full.t.size(); ++i) {
    dev = std::max(dev, std::abs(ev.full.q_exp[i][0] - std::cos(ev.full.t[i])));
  }
  CHECK(dev <= 1e-6);
  CHECK(ev.full.norm_drift() <= 1e-9);
  CHECK(ev.full.energy_drift() <= 1e-8);
  CHECK(ev.reduced.energy_drift() <= 1e-8);
  CHECK(ev.deviation.max_dq <= 1e-6);
  CHECK(ev.deviation.max_dp <= 1e-6);

  const auto csv = merge(ev.full, ev.reduced).to_csv();
  CHECK(csv.rfind("t,p0,q0,Qexp0,Pexp0,norm,energy\n", 0) == 0);
}

TEST_CASE("quartic evolution conserves norm and energy; deviations shrink with hbar") {
  const auto model = load(kQuartic);
  const auto ev = correspondence::evolve_model(model, {{0.0}, {1.0}}, {1e-2, 5.0});
  CHECK(ev.full.norm_drift() <= 1e-9);
  CHECK(ev.full.energy_drift() <= 1e-8);
  CHECK(ev.deviation.max_dq > 0);

  auto spec = dsl::parse_model(kQuartic).model.value();
  dsl::override_parameter(spec, "hbar", Rational(1, 4));
  const auto small = correspondence::evolve_model(dsl::validate(spec), {{0.0}, {1.0}}, {1e-2, 5.0});
  CHECK(small.deviation.max_dq < ev.deviation.max_dq);
}

TEST_CASE("compare_trajectories edge cases") {
  const ReducedSystem sys(harmonic(), {{kP, kQ}}, {});
  const auto a = reduced_evolve(sys, {0.0}, {1.0}, {1e-2, 1.0});
  const auto same = compare_trajectories(a, a);
  CHECK(same.max_dq == 0);
  CHECK(same.max_dp == 0);
  CHECK(same.rms_dq == 0);
  const auto b = reduced_evolve(sys, {0.0}, {1.0}, {1e-2, 2.0});
  try {
    compare_trajectories(a, b);
    FAIL("expected a grid mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kGridMismatch);
  }
}
