// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eqlab/correspondence.hpp"
#include "eqlab/dsl/model.hpp"
#include "eqlab/dsl/parser.hpp"
#include "eqlab/errors.hpp"
#include "eqlab/normal_order.hpp"
#include "eqlab/rotsym.hpp"
#include "oracles.hpp"

using namespace eqlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string sci(double x) { return fmt("%.2e", x); }

dsl::CheckedModel load(const std::string& text) {
  auto r = dsl::parse_model(text);
  if (!r.ok()) throw std::runtime_error("bad model text: " + r.diagnostics.front().message);
  return dsl::validate(*r.model);
}

ScalarPoly param(const char* name) { return ScalarPoly::atom(Atom::parameter(name)); }
ScalarPoly shift(const char* name, int n) { return ScalarPoly::atom(Atom::shift(name, n)); }
ScalarPoly rat(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return ScalarPoly(r);
}
Rational frac(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}
OperatorExpr op(const Generator& g) { return OperatorExpr(g); }

std::shared_ptr<const FiducialFrame> vacuum_frame(const ScalarPoly& scale, int modes) {
  std::vector<LinearForm> forms;
  for (int n = 0; n < modes; ++n) forms.push_back({{Generator::Q(n), scale}, {Generator::P(n), ScalarPoly::i()}});
  return std::make_shared<FiducialFrame>("vac", forms);
}

std::string model_text(int modes, int truncation) {
  return "param hbar = 1\nparam omega = 1\nset pq " + std::to_string(modes) + "\ntruncation " +
         std::to_string(truncation) + "\nH = P[0]^2\n";
}

std::vector<Generator> generators(int modes) {
  std::vector<Generator> g;
  for (int n = 0; n < modes; ++n) {
    g.push_back(Generator::Q(n));
    g.push_back(Generator::P(n));
  }
  return g;
}

// Random Hermitian polynomial with at least one symmetrized degree-4 word.
OperatorExpr random_quartic(std::mt19937& rng, const std::vector<Generator>& gens) {
  OperatorExpr h = testing::random_hermitian(rng, gens, 6, 4);
  std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
  std::uniform_int_distribution<int> num(1, 4);
  Word w;
  for (int k = 0; k < 4; ++k) w.push_back(gens[pick(rng)]);
  const OperatorExpr top(w, rat(num(rng), 4));
  h += (top + adjoint(top)) * rat(1, 2);
  return canonicalize(h);
}

// 1. (m0 Q - i P)(m0 Q + i P) = P^2 + m0^2 Q^2 - hbar m0 = :P^2 + m0^2 Q^2:
Outcome factorized_quadratic() {
  const ScalarPoly m0 = param("m0");
  const OperatorExpr Q = op(Generator::Q(0)), P = op(Generator::P(0));
  const auto frame = vacuum_frame(m0, 1);
  const OperatorExpr product = canonicalize((m0 * Q - ScalarPoly::i() * P) * (m0 * Q + ScalarPoly::i() * P));
  const OperatorExpr shifted_sum = canonicalize(P * P + m0 * m0 * Q * Q - OperatorExpr(ScalarPoly::hbar() * m0));
  const OperatorExpr ordered = to_operator(wick(P * P + m0 * m0 * Q * Q, frame));
  const bool a = product == shifted_sum, b = shifted_sum == ordered;
  return {a && b, std::string("product==sum-hbar*m0: ") + (a ? "yes" : "no") + ", ==wick: " + (b ? "yes" : "no") +
                      "; " + to_string(ordered)};
}

// 2. symbol of 1/2 :sum(P^2 + m0^2 Q^2): + w :(sum(P^2 + m0^2 Q^2))^2: for N = 2
Outcome quartic_symbol_n2() {
  const ScalarPoly m0 = param("m0"), w = param("w");
  const auto frame = vacuum_frame(m0, 2);
  OperatorExpr quad;
  ScalarPoly classical;
  for (int n = 0; n < 2; ++n) {
    quad += op(Generator::P(n)) * op(Generator::P(n)) + m0 * m0 * op(Generator::Q(n)) * op(Generator::Q(n));
    classical += shift("p", n) * shift("p", n) + m0 * m0 * shift("q", n) * shift("q", n);
  }
  const OperatorExpr h = rat(1, 2) * to_operator(wick(quad, frame)) + w * to_operator(wick(quad * quad, frame));
  const ScalarPoly got = wcp_symbolic(h, frame, {OperatorSet::kPQ});
  const ScalarPoly want = rat(1, 2) * classical + w * classical * classical;
  return {got == want, std::to_string(got.size()) + " terms, " + (got == want ? "identical" : to_string(got))};
}

// 3. exact reducible match for N = 1..3
Outcome reducible_exact() {
  int checked = 0;
  std::string bad;
  for (int n : {1, 2, 3}) {
    for (const auto& [m, zeta, v] :
         {std::tuple{frac(1), frac(1, 2), frac(1)}, std::tuple{frac(2), frac(1, 3), frac(1, 2)}}) {
      rotsym::NumericCheck off;
      off.enabled = false;
      const auto report = rotsym::verify_match({n, m, zeta, v}, off);
      const auto [m0sq, lambda0] = rotsym::effective_parameters(m, zeta, v);
      const Rational want_m0sq = m * m * (1 + zeta * zeta);
      const Rational want_lambda0 = v * zeta * zeta * zeta * zeta * m * m * m * m;
      const bool ok = report.exact_match && m0sq == want_m0sq && lambda0 == want_lambda0;
      if (!ok) bad += " N=" + std::to_string(n) + ",m=" + m.get_str();
      ++checked;
    }
  }
  return {bad.empty(), std::to_string(checked) + " cases" + (bad.empty() ? "" : ", failed:" + bad)};
}

// 4. numeric reducible match at D = 24 and convergence at D = 48
Outcome reducible_numeric() {
  auto residual = [](int d) {
    rotsym::NumericCheck check;
    check.truncation = d;
    const auto report = rotsym::verify_match({1, frac(1), frac(1, 2), frac(1)}, check);
    double worst = 0;
    for (const auto& pt : report.numeric_points) {
      const double p = pt.point.p[0], q = pt.point.q[0];
      const double classical = 0.5 * (p * p + 1.25 * q * q) + 0.0625 * q * q * q * q;
      worst = std::max(worst, std::abs(pt.numeric - classical));
    }
    return std::pair{worst, report.numeric_points.size()};
  };
  const auto [r24, n24] = residual(24);
  const auto [r48, n48] = residual(48);
  const double ratio = r24 / std::max(r48, 1e-300);
  const bool ok = n24 == 9 && n48 == 9 && r24 <= 1e-4 && ratio >= 10;
  return {ok, "D=24 " + sci(r24) + ", D=48 " + sci(r48) + ", ratio " + sci(ratio)};
}

// 5. 2 hbar times the Fubini-Study metric is diag(1/omega, omega)
Outcome flat_metric() {
  double worst = 0;
  for (int omega : {1, 2}) {
    const auto model =
        load("param hbar = 1\nparam omega = " + std::to_string(omega) + "\nH = 1/2*(P[0]^2 + omega^2*Q[0]^2)\n");
    const auto nm = correspondence::prepare(model);
    for (const auto& pt : correspondence::grid(1, 3, 1.0)) {
      const auto g = correspondence::fubini_study_metric(nm.space, nm.fiducial.state, nm.shifted, pt);
      Eigen::Matrix2d want;
      want << 1.0 / omega, 0, 0, omega;
      worst = std::max(worst, (g.matrix - want).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-6, "max entry error " + sci(worst) + " over 2x9 points"};
}

// 6. <p,q|H|p,q> = <0|H(P + p, Q + q)|0>
Outcome displaced_identity() {
  std::mt19937 rng(606);
  const auto base = load(model_text(1, 64));
  const auto gens = generators(1);
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    dsl::CheckedModel model = base;
    model.hamiltonian = random_quartic(rng, gens);
    const auto nm = correspondence::prepare(model);
    for (const auto& pt : correspondence::grid(1, 3, 1.0)) {
      const double lhs = fock::expectation(nm.hamiltonian, correspondence::coherent(nm, pt).state).real();
      const double rhs = correspondence::displaced_expectation(model, nm, model.hamiltonian, pt);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return {worst <= 1e-8, "10 Hamiltonians x 9 points, max |diff| " + sci(worst)};
}

// 7. wcp_numeric against wcp_symbolic on random Hamiltonians
Outcome symbolic_numeric() {
  std::mt19937 rng(707);
  double worst = 0;
  int flagged = 0;
  for (int t = 0; t < 20; ++t) {
    const int modes = 1 + t % 2;
    dsl::CheckedModel model = load(model_text(modes, 64));
    model.hamiltonian = canonicalize(testing::random_hermitian(rng, generators(modes), 6, 4));
    const auto report = correspondence::wcp_numeric(model, correspondence::grid(modes, 3, 1.0));
    for (const auto& pt : report.points) flagged += pt.flagged;
    worst = std::max(worst, report.max_abs_dev());
  }
  return {worst <= 1e-6 && flagged == 0,
          "20 Hamiltonians, max |num - sym| " + sci(worst) + ", leakage flags " + std::to_string(flagged)};
}

// 8. quadratic H: full and reduced dynamics coincide
Outcome quadratic_dynamics() {
  struct Case {
    const char* text;
    correspondence::PhasePoint start;
  };
  const std::vector<Case> cases = {
      {"param hbar = 1\nparam omega = 1\nH = 1/2*(P[0]^2 + omega^2*Q[0]^2)\n", {{0.0}, {1.0}}},
      {"param hbar = 1\nparam omega = 2\nH = 1/2*(P[0]^2 + omega^2*Q[0]^2)\n", {{0.5}, {-0.7}}},
      {"param hbar = 1\nparam omega = 1\nH = 1/2*(P[0]^2 + Q[0]^2) + 1/4*(Q[0]*P[0] + P[0]*Q[0])\n", {{0.3}, {0.8}}},
      {"param hbar = 1\nparam omega = 1\nset pq 2\ntruncation 32\n"
       "H = 1/2*(P[0]^2 + P[1]^2) + 1/2*(Q[0]^2 + 2*Q[1]^2) + 1/4*Q[0]*Q[1]\n",
       {{0.0, 0.2}, {1.0, -0.5}}},
  };
  double dev = 0, norm = 0, e_full = 0, e_red = 0, analytic = 0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto model = load(cases[c].text);
    const auto ev = correspondence::evolve_model(model, cases[c].start, {1e-2, 10.0});
    dev = std::max({dev, ev.deviation.max_dq, ev.deviation.max_dp});
    norm = std::max(norm, ev.full.norm_drift());
    e_full = std::max(e_full, ev.full.energy_drift());
    e_red = std::max(e_red, ev.reduced.energy_drift());
    if (c == 0) {
      for (std::size_t i = 0; i < ev.full.t.size(); ++i) {
        analytic = std::max(analytic, std::abs(ev.full.q_exp[i][0] - std::cos(ev.full.t[i])));
      }
    }
  }
  const bool ok = dev <= 1e-6 && analytic <= 1e-6 && norm <= 1e-9 && e_full <= 1e-8 && e_red <= 1e-8;
  return {ok, "max dev " + sci(dev) + ", |<Q>-cos t| " + sci(analytic) + ", norm " + sci(norm) + ", energy " +
                  sci(e_full) + "/" + sci(e_red)};
}

// 9. quartic: deviation from the classical path shrinks with hbar
Outcome hbar_direction() {
  const std::string text =
      "param hbar = 1\nparam omega = 1\nparam lambda = 1/10\nH = 1/2*(P[0]^2 + Q[0]^2) + lambda*Q[0]^4\n";
  auto spec = dsl::parse_model(text).model.value();
  const auto big = correspondence::evolve_model(dsl::validate(spec), {{0.0}, {1.0}}, {1e-2, 5.0});
  dsl::override_parameter(spec, "hbar", frac(1, 4));
  const auto small = correspondence::evolve_model(dsl::validate(spec), {{0.0}, {1.0}}, {1e-2, 5.0});
  const double a = big.deviation.max_dq, b = small.deviation.max_dq;
  return {b < a, "max |<Q>-q| hbar=1 " + sci(a) + ", hbar=1/4 " + sci(b)};
}

// 10. zeta boundary
Outcome zeta_boundary() {
  std::string detail;
  bool ok = true;
  for (const auto& zeta : {frac(1), frac(11, 10)}) {
    try {
      rotsym::build_reducible_model({1, frac(1), zeta, frac(1)});
      ok = false;
      detail += "zeta=" + zeta.get_str() + " accepted; ";
    } catch (const Error& e) {
      const bool right = e.kind() == ErrorKind::kGramNotPositiveDefinite;
      ok = ok && right;
      detail += "zeta=" + zeta.get_str() + " " + to_string(e.kind()) + "; ";
    }
  }
  try {
    rotsym::build_reducible_model({1, frac(1), frac(9, 10), frac(1)});
    detail += "zeta=9/10 accepted";
  } catch (const Error& e) {
    ok = false;
    detail += std::string("zeta=9/10 ") + to_string(e.kind());
  }
  return {ok, detail};
}

bool spans_in_bounds(const std::vector<dsl::ParseDiagnostic>& diags, const std::string& text) {
  for (const auto& d : diags) {
    if (d.span.line < 1 || d.span.column < 1 || d.span.length < 0) return false;
    if (d.span.offset > text.size() || d.span.offset + d.span.length > text.size()) return false;
  }
  return true;
}

// 11. corpus round-trip and mutation fuzz
Outcome parser_robustness() {
  std::vector<std::string> corpus;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(EQLAB_MODELS_DIR)) {
    if (e.path().extension() == ".eqm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    corpus.push_back(os.str());
  }
  for (int n : {1, 2, 3}) corpus.push_back(rotsym::reducible_source({n, frac(1), frac(1, 2), frac(1)}));

  int round_trips = 0;
  for (const auto& text : corpus) {
    const auto r = dsl::parse_model(text);
    if (!r.ok()) return {false, "corpus entry failed to parse: " + r.diagnostics.front().message};
    const auto again = dsl::parse_model(dsl::render_model(*r.model));
    if (!again.ok() || !(*again.model == *r.model)) return {false, "corpus entry did not round-trip"};
    dsl::validate(*r.model);
    ++round_trips;
  }

  std::mt19937_64 rng(11);
  int rejected = 0, accepted_round_trip = 0;
  constexpr int kIterations = 100000;
  for (int it = 0; it < kIterations; ++it) {
    std::string t = corpus[rng() % corpus.size()];
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits && !t.empty(); ++e) {
      const std::size_t at = rng() % t.size();
      switch (rng() % 3) {
        case 0: t[at] = static_cast<char>(rng() % 256); break;
        case 1: t.erase(at, 1); break;
        default: t.insert(at, 1, static_cast<char>(rng() % 256)); break;
      }
    }
    dsl::ParseResult r;
    try {
      r = dsl::parse_model(t);
    } catch (const std::exception& e) {
      return {false, "iteration " + std::to_string(it) + " threw: " + e.what()};
    }
    if (!spans_in_bounds(r.diagnostics, t)) return {false, "iteration " + std::to_string(it) + ": span out of bounds"};
    if (!r.ok()) {
      if (r.diagnostics.empty()) return {false, "iteration " + std::to_string(it) + ": rejected without diagnostic"};
      ++rejected;
      continue;
    }
    const auto again = dsl::parse_model(dsl::render_model(*r.model));
    if (!again.ok() || !(*again.model == *r.model)) {
      return {false, "iteration " + std::to_string(it) + ": accepted mutant did not round-trip"};
    }
    ++accepted_round_trip;
  }
  return {true, std::to_string(round_trips) + " corpus round-trips, " + std::to_string(kIterations) +
                    " mutants (" + std::to_string(rejected) + " rejected, " + std::to_string(accepted_round_trip) +
                    " accepted and round-tripped)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "factorized quadratic equals its normal-ordered form", 1, factorized_quadratic},
      {2, "symbol of the normal-ordered quartic model, N=2", 1, quartic_symbol_n2},
      {3, "reducible model matches the effective classical H exactly", 10, reducible_exact},
      {4, "reducible model numeric agreement and D convergence", 300, reducible_numeric},
      {5, "coherent-state metric is flat", 30, flat_metric},
      {6, "coherent expectation equals displaced fiducial expectation", 60, displaced_identity},
      {7, "symbolic and numeric symbols agree on random H", 300, symbolic_numeric},
      {8, "quadratic H: full and reduced dynamics coincide", 60, quadratic_dynamics},
      {9, "quartic H: deviation shrinks as hbar decreases", 120, hbar_direction},
      {10, "zeta boundary in validation", 1, zeta_boundary},
      {11, "parser corpus round-trip and mutation fuzz", 300, parser_robustness},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << out.detail << " ("
              << fmt("%.2f", secs) << " s, limit " << fmt("%g", c.limit_seconds) << " s"
              << (in_time ? "" : ", over time limit") << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
