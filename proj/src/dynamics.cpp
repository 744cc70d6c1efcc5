#include "eqlab/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "eqlab/errors.hpp"

namespace eqlab::dynamics {

int TimeGrid::steps() const {
  if (!(dt > 0) || !(horizon >= 0)) throw Error(ErrorKind::kInvalidModel, "time grid needs dt > 0 and horizon >= 0");
  return static_cast<int>(std::llround(horizon / dt));
}

namespace {

double max_drift(const std::vector<double>& v, bool relative) {
  if (v.empty()) return 0;
  const double scale = relative ? std::max(1.0, std::abs(v.front())) : 1.0;
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x - v.front()) / scale);
  return m;
}

}  // namespace

double Trajectory::energy_drift() const { return max_drift(energy, true); }
double Trajectory::norm_drift() const {
  double m = 0;
  for (double x : norm) m = std::max(m, std::abs(x - 1));
  return m;
}

std::string Trajectory::to_csv() const {
  const std::size_t modes = !p.empty() ? p.front().size() : (!q_exp.empty() ? q_exp.front().size() : 0);
  std::ostringstream os;
  os << std::setprecision(17) << "t";
  auto header = [&](bool present, const char* prefix) {
    if (!present) return;
    for (std::size_t k = 0; k < modes; ++k) os << "," << prefix << k;
  };
  header(!p.empty(), "p");
  header(!q.empty(), "q");
  header(!q_exp.empty(), "Qexp");
  header(!p_exp.empty(), "Pexp");
  if (!norm.empty()) os << ",norm";
  if (!energy.empty()) os << ",energy";
  os << "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t[i];
    for (const auto* col : {&p, &q, &q_exp, &p_exp}) {
      if (col->empty()) continue;
      for (double x : (*col)[i]) os << "," << x;
    }
    if (!norm.empty()) os << "," << norm[i];
    if (!energy.empty()) os << "," << energy[i];
    os << "\n";
  }
  return os.str();
}

Trajectory merge(const Trajectory& full, const Trajectory& reduced) {
  Trajectory out = full;
  out.p = reduced.p;
  out.q = reduced.q;
  return out;
}

Trajectory schrodinger_evolve(const fock::MatrixOp& h, const fock::StateVector& psi0, const TimeGrid& grid,
                              const Observables& observables, double hbar) {
  if (h.matrix.rows() != psi0.amplitudes.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "Hamiltonian and state sizes differ");
  }
  if (!h.hermitian) throw Error(ErrorKind::kNonHermitianHamiltonian, "evolution needs a Hermitian Hamiltonian");
  Trajectory out;
  fock::Vector psi = psi0.amplitudes;
  auto record = [&](double t) {
    out.t.push_back(t);
    std::vector<double> qs, ps;
    for (const auto& [qm, pm] : observables) {
      qs.push_back(fock::expectation(qm.matrix, psi).real());
      ps.push_back(fock::expectation(pm.matrix, psi).real());
    }
    out.q_exp.push_back(std::move(qs));
    out.p_exp.push_back(std::move(ps));
    out.norm.push_back(psi.norm());
    out.energy.push_back(fock::expectation(h.matrix, psi).real());
  };
  record(0);
  const int n = grid.steps();
  const fock::Complex factor(0, -grid.dt / hbar);
  for (int k = 1; k <= n; ++k) {
    const double before = psi.norm();
    psi = fock::expm_action(h.matrix, psi, factor);
    if (std::abs(psi.norm() - before) > 1e-10) {
      throw Error(ErrorKind::kStepRejected, "exponential action lost norm at step " + std::to_string(k));
    }
    record(grid.time(k));
  }
  return out;
}

double ReducedSystem::Compiled::eval(const std::vector<double>& x) const {
  double s = 0;
  for (const auto& term : terms) {
    double v = term.coeff;
    for (const auto& [var, e] : term.powers) {
      const double b = x[var];
      double pw = 1;
      for (int k = 0; k < std::abs(e); ++k) pw *= b;
      v *= e < 0 ? 1 / pw : pw;
    }
    s += v;
  }
  return s;
}

namespace {

ReducedSystem::Compiled compile(const ScalarPoly& poly, const std::vector<Atom>& vars, const Binding& binding) {
  ReducedSystem::Compiled out;
  std::map<std::vector<std::pair<int, int>>, double> acc;
  for (const auto& [mono, coeff] : poly.terms()) {
    double c = ScalarPoly(coeff).evaluate({}).real();
    std::vector<std::pair<int, int>> powers;
    for (const auto& [atom, e] : mono.factors()) {
      const auto it = std::find(vars.begin(), vars.end(), atom);
      if (it != vars.end()) {
        powers.emplace_back(static_cast<int>(it - vars.begin()), e);
        continue;
      }
      const auto b = binding.find(atom);
      if (b == binding.end()) throw Error(ErrorKind::kUnboundSymbol, "unbound symbol " + to_string(atom));
      c *= std::pow(b->second, e);
    }
    acc[powers] += c;
  }
  for (auto& [powers, c] : acc) {
    if (c != 0) out.terms.push_back({c, powers});
  }
  return out;
}

}  // namespace

ReducedSystem::ReducedSystem(const ScalarPoly& h, std::vector<std::pair<Atom, Atom>> coordinates,
                             const Binding& binding)
    : coords_(std::move(coordinates)) {
  std::vector<Atom> vars;
  for (const auto& c : coords_) vars.push_back(c.first);
  for (const auto& c : coords_) vars.push_back(c.second);
  h_ = compile(h, vars, binding);
  for (const auto& [pa, qa] : coords_) {
    dh_dp_.push_back(compile(h.derivative(pa), vars, binding));
    dh_dq_.push_back(compile(h.derivative(qa), vars, binding));
  }
  const int n = static_cast<int>(coords_.size());
  for (const auto& term : h_.terms) {
    bool has_p = false, has_q = false;
    for (const auto& [var, e] : term.powers) (var < n ? has_p : has_q) = true;
    if (has_p && has_q) separable_ = false;
  }
}

std::vector<double> ReducedSystem::pack(const std::vector<double>& p, const std::vector<double>& q) const {
  std::vector<double> x(p);
  x.insert(x.end(), q.begin(), q.end());
  return x;
}

double ReducedSystem::energy(const std::vector<double>& p, const std::vector<double>& q) const {
  return h_.eval(pack(p, q));
}

void ReducedSystem::base_step(std::vector<double>& p, std::vector<double>& q, double h) const {
  const std::size_t n = coords_.size();
  if (separable_) {
    auto kick = [&](double tau) {
      const auto x = pack(p, q);
      for (std::size_t k = 0; k < n; ++k) p[k] -= tau * dh_dq_[k].eval(x);
    };
    kick(h / 2);
    const auto x = pack(p, q);
    for (std::size_t k = 0; k < n; ++k) q[k] += h * dh_dp_[k].eval(x);
    kick(h / 2);
    return;
  }
  // Implicit midpoint by fixed-point iteration.
  std::vector<double> p1 = p, q1 = q;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> pm(n), qm(n);
    for (std::size_t k = 0; k < n; ++k) {
      pm[k] = 0.5 * (p[k] + p1[k]);
      qm[k] = 0.5 * (q[k] + q1[k]);
    }
    const auto x = pack(pm, qm);
    double change = 0, scale = 1;
    for (std::size_t k = 0; k < n; ++k) {
      const double np = p[k] - h * dh_dq_[k].eval(x);
      const double nq = q[k] + h * dh_dp_[k].eval(x);
      change = std::max({change, std::abs(np - p1[k]), std::abs(nq - q1[k])});
      scale = std::max({scale, std::abs(np), std::abs(nq)});
      p1[k] = np;
      q1[k] = nq;
    }
    if (change <= 1e-15 * scale) {
      p = p1;
      q = q1;
      return;
    }
  }
  throw Error(ErrorKind::kStepRejected, "implicit midpoint iteration did not converge");
}

void ReducedSystem::composed(std::vector<double>& p, std::vector<double>& q, double h, int order) const {
  if (order <= 2) {
    base_step(p, q, h);
    return;
  }
  const double g1 = 1 / (2 - std::pow(2.0, 1.0 / (order - 1)));
  const double g0 = 1 - 2 * g1;
  composed(p, q, g1 * h, order - 2);
  composed(p, q, g0 * h, order - 2);
  composed(p, q, g1 * h, order - 2);
}

void ReducedSystem::step(std::vector<double>& p, std::vector<double>& q, double h) const {
  composed(p, q, h, kReducedOrder);
}

Trajectory reduced_evolve(const ReducedSystem& system, const std::vector<double>& p0, const std::vector<double>& q0,
                          const TimeGrid& grid) {
  if (p0.size() != system.modes() || q0.size() != system.modes()) {
    throw Error(ErrorKind::kDimensionMismatch, "start point does not match the number of modes");
  }
  Trajectory out;
  std::vector<double> p = p0, q = q0;
  const int n = grid.steps();
  for (int k = 0; k <= n; ++k) {
    if (k > 0) system.step(p, q, grid.dt);
    out.t.push_back(grid.time(k));
    out.p.push_back(p);
    out.q.push_back(q);
    out.energy.push_back(system.energy(p, q));
  }
  return out;
}

nlohmann::ordered_json DeviationReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "eqlab.deviation/1";
  j["samples"] = t.size();
  j["max_dq"] = max_dq;
  j["max_dp"] = max_dp;
  j["rms_dq"] = rms_dq;
  j["rms_dp"] = rms_dp;
  return j;
}

DeviationReport compare_trajectories(const Trajectory& full, const Trajectory& reduced) {
  if (full.t.size() != reduced.t.size()) throw Error(ErrorKind::kGridMismatch, "trajectories have different lengths");
  for (std::size_t i = 0; i < full.t.size(); ++i) {
    if (std::abs(full.t[i] - reduced.t[i]) > 1e-12) {
      throw Error(ErrorKind::kGridMismatch, "time grids differ at sample " + std::to_string(i));
    }
  }
  const auto& fq = full.q_exp.empty() ? full.q : full.q_exp;
  const auto& fp = full.p_exp.empty() ? full.p : full.p_exp;
  const auto& rq = reduced.q.empty() ? reduced.q_exp : reduced.q;
  const auto& rp = reduced.p.empty() ? reduced.p_exp : reduced.p;
  if (fq.size() != full.t.size() || rq.size() != reduced.t.size()) {
    throw Error(ErrorKind::kGridMismatch, "trajectory is missing position samples");
  }
  DeviationReport out;
  out.t = full.t;
  double sq = 0, sp = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < full.t.size(); ++i) {
    if (fq[i].size() != rq[i].size()) throw Error(ErrorKind::kGridMismatch, "mode counts differ");
    std::vector<double> dq(fq[i].size()), dp(fq[i].size());
    for (std::size_t k = 0; k < dq.size(); ++k) {
      dq[k] = std::abs(fq[i][k] - rq[i][k]);
      dp[k] = (fp.empty() || rp.empty()) ? 0.0 : std::abs(fp[i][k] - rp[i][k]);
      out.max_dq = std::max(out.max_dq, dq[k]);
      out.max_dp = std::max(out.max_dp, dp[k]);
      sq += dq[k] * dq[k];
      sp += dp[k] * dp[k];
      ++count;
    }
    out.dq.push_back(std::move(dq));
    out.dp.push_back(std::move(dp));
  }
  if (count > 0) {
    out.rms_dq = std::sqrt(sq / count);
    out.rms_dp = std::sqrt(sp / count);
  }
  return out;
}

}  // namespace eqlab::dynamics
