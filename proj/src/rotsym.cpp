#include "eqlab/rotsym.hpp"

#include <cmath>
#include <sstream>

#include "eqlab/dsl/parser.hpp"
#include "eqlab/errors.hpp"
#include "eqlab/normal_order.hpp"

namespace eqlab::rotsym {

namespace {

void check_zeta(const Rational& zeta) {
  if (sgn(zeta) <= 0 || cmp(zeta, 1) >= 0) {
    throw Error(ErrorKind::kZetaOutOfRange, "zeta = " + to_string(zeta) + " is outside (0, 1)");
  }
}

ScalarPoly momentum(int k) { return ScalarPoly::atom(shift_atom(OperatorSet::kPQ, GeneratorKind::kMomentum, k)); }
ScalarPoly position(int k) { return ScalarPoly::atom(shift_atom(OperatorSet::kPQ, GeneratorKind::kPosition, k)); }

std::string sum_of(int n, const std::string& pattern) {
  std::string out;
  for (int k = 0; k < n; ++k) {
    std::string term = pattern;
    for (std::size_t at; (at = term.find('#')) != std::string::npos;) term.replace(at, 1, std::to_string(k));
    out += (k == 0 ? "" : " + ") + term;
  }
  return out;
}

Rational pow4(const Rational& x) { return Rational(x * x * x * x); }

}  // namespace

Rational RotsymParams::m0sq() const { return Rational(m * m * (1 + zeta * zeta)); }
Rational RotsymParams::lambda0() const { return Rational(v * pow4(zeta) * pow4(m)); }

ScalarPoly build_classical(int n, const ScalarPoly& m0sq, const ScalarPoly& lambda0) {
  ScalarPoly quad, qsq;
  for (int k = 0; k < n; ++k) {
    quad += momentum(k) * momentum(k) + m0sq * position(k) * position(k);
    qsq += position(k) * position(k);
  }
  return ScalarPoly(Rational(1, 2)) * quad + lambda0 * qsq * qsq;
}

ScalarPoly build_classical(int n, const Rational& m0sq, const Rational& lambda0) {
  return build_classical(n, ScalarPoly(m0sq), ScalarPoly(lambda0));
}

std::string reducible_source(const RotsymParams& params, int truncation) {
  std::ostringstream os;
  os << "# reducible rotationally symmetric model, N = " << params.n << "\n";
  os << "param hbar = 1\n";
  os << "param m = " << params.m.get_str() << "\n";
  os << "param zeta = " << params.zeta.get_str() << "\n";
  os << "param v = " << params.v.get_str() << "\n";
  os << "set pq " << params.n << "\nset rs " << params.n << "\n";
  os << "frame zf {";
  for (int k = 0; k < params.n; ++k) {
    const std::string s = std::to_string(k);
    os << (k == 0 ? " " : ", ") << "m*(Q[" << s << "] + zeta*S[" << s << "]) + i*P[" << s << "], m*(S[" << s
       << "] + zeta*Q[" << s << "]) + i*R[" << s << "]";
  }
  os << " }\nfiducial zf\nshifted pq\ntruncation " << truncation << "\n";
  const std::string first = sum_of(params.n, "P[#]^2 + m^2*(Q[#] + zeta*S[#])^2");
  const std::string second = sum_of(params.n, "R[#]^2 + m^2*(S[#] + zeta*Q[#])^2");
  os << "H = 1/2*:[" << first << "]: @zf + 1/2*:[" << second << "]: @zf + v*:[(" << second << ")^2]: @zf\n";
  return os.str();
}

dsl::ModelSpec build_reducible_spec(const RotsymParams& params, int truncation) {
  if (params.n < 1) throw Error(ErrorKind::kInvalidModel, "N must be at least 1");
  if (sgn(params.m) <= 0) throw Error(ErrorKind::kInvalidModel, "m must be positive");
  if (sgn(params.v) < 0) throw Error(ErrorKind::kInvalidModel, "v must be non-negative");
  if (sgn(params.zeta) <= 0) {
    throw Error(ErrorKind::kZetaOutOfRange, "zeta = " + to_string(params.zeta) + " must be positive");
  }
  auto r = dsl::parse_model(reducible_source(params, truncation));
  if (!r.ok()) throw Error(ErrorKind::kInvalidModel, r.diagnostics.front().message);
  return *r.model;
}

dsl::CheckedModel build_reducible_model(const RotsymParams& params, int truncation) {
  return dsl::validate(build_reducible_spec(params, truncation));
}

std::pair<Rational, Rational> effective_parameters(const Rational& m, const Rational& zeta, const Rational& v) {
  check_zeta(zeta);
  const RotsymParams p{1, m, zeta, v};
  return {p.m0sq(), p.lambda0()};
}

Inverted invert_parameters(const Rational& m0sq, const Rational& lambda0, const Rational& zeta) {
  check_zeta(zeta);
  if (sgn(m0sq) <= 0) throw Error(ErrorKind::kInvalidModel, "m0^2 must be positive");
  if (sgn(lambda0) < 0) throw Error(ErrorKind::kInvalidModel, "lambda0 must be non-negative");
  Inverted out;
  out.msq = m0sq / (1 + zeta * zeta);
  out.v = lambda0 / (pow4(zeta) * out.msq * out.msq);
  out.m = std::sqrt(out.msq.get_d());
  const mpz_class num = out.msq.get_num(), den = out.msq.get_den();
  if (mpz_perfect_square_p(num.get_mpz_t()) && mpz_perfect_square_p(den.get_mpz_t())) {
    out.m_exact = Rational(mpz_class(sqrt(num)), mpz_class(sqrt(den)));
  }
  return out;
}

nlohmann::ordered_json MatchReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "eqlab.rotsym/1";
  j["N"] = params.n;
  j["m"] = params.m.get_str();
  j["zeta"] = params.zeta.get_str();
  j["v"] = params.v.get_str();
  j["m0sq"] = params.m0sq().get_str();
  j["lambda0"] = params.lambda0().get_str();
  j["exact_match"] = exact_match;
  j["classical_rendered"] = classical_rendered;
  j["wcp_rendered"] = wcp_rendered;
  auto& pts = j["numeric_points"] = nlohmann::ordered_json::array();
  for (const auto& pt : numeric_points) {
    nlohmann::ordered_json e;
    e["p"] = pt.point.p;
    e["q"] = pt.point.q;
    e["H_num"] = pt.numeric;
    e["H_sym"] = pt.symbolic;
    e["abs_dev"] = pt.abs_dev;
    pts.push_back(e);
  }
  j["max_abs_dev"] = max_abs_dev;
  j["truncation"] = truncation;
  return j;
}

MatchReport verify_match(const RotsymParams& params, const NumericCheck& numeric) {
  const auto [m0sq, lambda0] = effective_parameters(params.m, params.zeta, params.v);
  const dsl::CheckedModel model = build_reducible_model(params, numeric.truncation);
  const ScalarPoly wcp = wcp_symbolic(model.hamiltonian, model.fiducial, model.shifted);
  const ScalarPoly classical = build_classical(params.n, m0sq, lambda0);

  MatchReport report;
  report.params = params;
  report.exact_match = wcp == classical;
  report.classical_rendered = to_string(classical);
  report.wcp_rendered = to_string(wcp);
  if (numeric.enabled) {
    report.truncation = numeric.truncation;
    const auto wcp_report = correspondence::wcp_numeric(
        model, correspondence::grid(static_cast<std::size_t>(params.n), numeric.per_axis, numeric.range));
    report.numeric_points = wcp_report.points;
    report.max_abs_dev = wcp_report.max_abs_dev();
  }
  return report;
}

ScalarPoly irreducible_wcp(int n) {
  std::ostringstream os;
  os << "param m0\nparam w\nset pq " << n << "\nframe vac {";
  for (int k = 0; k < n; ++k) os << (k == 0 ? " " : ", ") << "m0*Q[" << k << "] + i*P[" << k << "]";
  const std::string quad = sum_of(n, "P[#]^2 + m0^2*Q[#]^2");
  os << " }\nfiducial vac\nH = 1/2*:[" << quad << "]: @vac + w*:[(" << quad << ")^2]: @vac\n";
  auto r = dsl::parse_model(os.str());
  if (!r.ok()) throw Error(ErrorKind::kInvalidModel, r.diagnostics.front().message);
  const auto model = dsl::validate(*r.model);
  return wcp_symbolic(model.hamiltonian, model.fiducial, model.shifted);
}

bool quartic_depends_on_momentum(const ScalarPoly& h) {
  for (const auto& [mono, c] : h.terms()) {
    int degree = 0;
    bool has_momentum = false;
    for (const auto& [atom, e] : mono.factors()) {
      if (atom.kind == AtomKind::kHbar) {
        degree = -1;
        break;
      }
      if (atom.kind != AtomKind::kShift) continue;
      degree += e;
      if (atom.name == "p" || atom.name == "r") has_momentum = true;
    }
    if (degree == 4 && has_momentum) return true;
  }
  return false;
}

}  // namespace eqlab::rotsym
