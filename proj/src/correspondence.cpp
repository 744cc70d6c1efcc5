#include "eqlab/correspondence.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "eqlab/errors.hpp"
#include "eqlab/normal_order.hpp"

namespace eqlab::correspondence {

using fock::Complex;

double model_hbar(const dsl::CheckedModel& model) {
  auto it = model.binding.find(Atom::hbar());
  return it == model.binding.end() ? 1.0 : it->second;
}

fock::FockSpace make_space(const dsl::CheckedModel& model, const NumericOptions& options) {
  const int d = options.truncation.value_or(model.truncation);
  const double omega = options.omega_rep.value_or(model.omega_rep);
  std::vector<fock::FockMode> modes;
  for (const auto& [set, index] : model.modes) modes.push_back({set, index, d, omega});
  return fock::FockSpace(std::move(modes), model_hbar(model));
}

NumericModel prepare(const dsl::CheckedModel& model, const NumericOptions& options) {
  fock::FockSpace space = make_space(model, options);
  Binding binding = model.binding;
  binding[Atom::hbar()] = space.hbar();
  fock::MatrixOp h = fock::build_operator(model.hamiltonian, space, binding);
  fock::FiducialResult fid = fock::fiducial_solve(fock::build_conditions(*model.fiducial, space, binding), space);
  std::vector<std::size_t> shifted;
  for (const auto& [set, index] : model.shifted_modes()) shifted.push_back(*space.find(set, index));
  return {std::move(space), std::move(h), std::move(fid), std::move(shifted), std::move(binding),
          options.leakage_bound};
}

Binding point_binding(const dsl::CheckedModel& model, const PhasePoint& point) {
  const auto modes = model.shifted_modes();
  if (point.p.size() != modes.size() || point.q.size() != modes.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "phase point needs " + std::to_string(modes.size()) +
                                                   " momenta and positions");
  }
  Binding b;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    b[shift_atom(modes[k].first, GeneratorKind::kMomentum, modes[k].second)] = point.p[k];
    b[shift_atom(modes[k].first, GeneratorKind::kPosition, modes[k].second)] = point.q[k];
  }
  return b;
}

fock::CoherentResult coherent(const NumericModel& nm, const PhasePoint& point) {
  return fock::coherent_state(nm.space, nm.fiducial.state, point.p, point.q, nm.shifted, nm.leakage_bound);
}

double displaced_expectation(const dsl::CheckedModel& model, const NumericModel& nm, const OperatorExpr& h,
                             const PhasePoint& point) {
  const OperatorExpr shifted = displace(h, phase_space_shifts(h.generators(), model.shifted));
  Binding b = nm.binding;
  for (const auto& [atom, value] : point_binding(model, point)) b[atom] = value;
  return fock::expectation(fock::build_operator(shifted, nm.space, b), nm.fiducial.state).real();
}

double WcpReport::max_abs_dev() const {
  double m = 0;
  for (const auto& pt : points) m = std::max(m, pt.abs_dev);
  return m;
}

nlohmann::ordered_json WcpReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "eqlab.wcp/1";
  j["model"] = model_id;
  j["coordinates"] = coordinates;
  j["truncation"] = truncation;
  j["omega_rep"] = omega_rep;
  j["fiducial_residual"] = fiducial_residual;
  j["symbolic"] = symbolic_rendered;
  j["max_abs_dev"] = max_abs_dev();
  auto& arr = j["points"] = nlohmann::ordered_json::array();
  for (const auto& pt : points) {
    nlohmann::ordered_json e;
    e["p"] = pt.point.p;
    e["q"] = pt.point.q;
    e["H_num"] = pt.numeric;
    e["H_sym"] = pt.symbolic;
    e["abs_dev"] = pt.abs_dev;
    e["rel_dev"] = pt.rel_dev;
    e["leakage"] = pt.leakage;
    e["flagged"] = pt.flagged;
    arr.push_back(e);
  }
  return j;
}

std::string WcpReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& c : coordinates) os << c << ",";
  os << "H_num,H_sym,abs_dev\n";
  for (const auto& pt : points) {
    for (double v : pt.point.p) os << v << ",";
    for (double v : pt.point.q) os << v << ",";
    os << pt.numeric << "," << pt.symbolic << "," << pt.abs_dev << "\n";
  }
  return os.str();
}

WcpReport wcp_numeric(const dsl::CheckedModel& model, const std::vector<PhasePoint>& points,
                      const NumericOptions& options, const std::string& model_id) {
  const NumericModel nm = prepare(model, options);
  const ScalarPoly sym = wcp_symbolic(model.hamiltonian, model.fiducial, model.shifted);

  WcpReport report;
  report.model_id = model_id;
  for (const auto& [set, index] : model.shifted_modes()) {
    report.coordinates.push_back(to_string(shift_atom(set, GeneratorKind::kMomentum, index)));
  }
  for (const auto& [set, index] : model.shifted_modes()) {
    report.coordinates.push_back(to_string(shift_atom(set, GeneratorKind::kPosition, index)));
  }
  for (const auto& m : nm.space.modes()) report.truncation.push_back(m.dim);
  report.omega_rep = nm.space.modes().empty() ? 1.0 : nm.space.modes().front().omega;
  report.fiducial_residual = nm.fiducial.residual;
  report.symbolic_rendered = to_string(sym);

  for (const auto& point : points) {
    WcpPoint out;
    out.point = point;
    const auto c = fock::coherent_state(nm.space, nm.fiducial.state, point.p, point.q, nm.shifted,
                                        std::numeric_limits<double>::infinity());
    out.leakage = c.leakage;
    out.flagged = c.leakage > options.leakage_bound;
    out.numeric = fock::expectation(nm.hamiltonian, c.state).real();
    Binding b = nm.binding;
    for (const auto& [atom, value] : point_binding(model, point)) b[atom] = value;
    out.symbolic = sym.evaluate(b).real();
    out.abs_dev = std::abs(out.numeric - out.symbolic);
    out.rel_dev = out.abs_dev / std::max(1.0, std::abs(out.symbolic));
    report.points.push_back(std::move(out));
  }
  return report;
}

std::pair<ScalarPoly, ScalarPoly> hbar_split(const ScalarPoly& h) {
  const Atom hb = Atom::hbar();
  ScalarPoly classical = h.filter([&](const Monomial& m) { return m.exponent_of(hb) == 0; });
  return {classical, h - classical};
}

std::vector<PhasePoint> grid(std::size_t modes, int per_axis, double range) {
  const std::size_t axes = 2 * modes;
  std::vector<double> ticks;
  for (int k = 0; k < per_axis; ++k) {
    ticks.push_back(per_axis == 1 ? 0.0 : -range + 2 * range * k / (per_axis - 1));
  }
  std::vector<PhasePoint> out;
  std::vector<int> idx(axes, 0);
  while (true) {
    PhasePoint pt;
    for (std::size_t a = 0; a < modes; ++a) pt.p.push_back(ticks[idx[a]]);
    for (std::size_t a = 0; a < modes; ++a) pt.q.push_back(ticks[idx[modes + a]]);
    out.push_back(std::move(pt));
    std::size_t a = axes;
    while (a > 0 && ++idx[a - 1] == per_axis) idx[--a] = 0;
    if (a == 0) break;
  }
  return out;
}

nlohmann::ordered_json MetricTensor::to_json(const std::vector<std::string>& coordinates) const {
  nlohmann::ordered_json j;
  j["schema"] = "eqlab.metric/1";
  if (!coordinates.empty()) j["coordinates"] = coordinates;
  auto& rows = j["matrix"] = nlohmann::ordered_json::array();
  for (long r = 0; r < matrix.rows(); ++r) {
    std::vector<double> row(matrix.cols());
    for (long c = 0; c < matrix.cols(); ++c) row[c] = matrix(r, c);
    rows.push_back(row);
  }
  j["step"] = step;
  j["richardson_change"] = richardson_change;
  return j;
}

namespace {

PhasePoint offset(const PhasePoint& base, const Eigen::VectorXd& d) {
  PhasePoint out = base;
  const std::size_t n = base.p.size();
  for (std::size_t k = 0; k < n; ++k) {
    out.p[k] += d(k);
    out.q[k] += d(n + k);
  }
  return out;
}

Eigen::MatrixXd metric_at_step(const fock::FockSpace& space, const fock::StateVector& fiducial,
                               const std::vector<std::size_t>& shifted, const PhasePoint& point, double h,
                               const Gauge& gauge, double bound) {
  const std::size_t dim = 2 * point.p.size();
  auto state = [&](const Eigen::VectorXd& d) {
    const PhasePoint pt = offset(point, d);
    fock::Vector v = fock::coherent_state(space, fiducial, pt.p, pt.q, shifted, bound).state.amplitudes;
    if (gauge) v *= std::exp(Complex(0, gauge(pt)));
    return v;
  };
  // 1 - |<psi(x - d)|psi(x + d)>|^2 = 4 d.g.d + O(d^4), with g the bare metric.
  // Evaluated as |b - P_a b|^2 / |b|^2 to avoid cancellation in 1 - |ov|^2.
  auto defect = [&](const Eigen::VectorXd& d) {
    const fock::Vector a = state(-d);
    const fock::Vector b = state(d);
    const fock::Vector r = b - a * (a.dot(b) / a.squaredNorm());
    return r.squaredNorm() / b.squaredNorm();
  };
  const double hbar = space.hbar();
  Eigen::MatrixXd g(dim, dim);
  std::vector<double> diag(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    d(i) = h;
    g(i, i) = hbar * defect(d) / (2 * h * h);
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      Eigen::VectorXd plus = Eigen::VectorXd::Zero(dim);
      plus(i) = h;
      plus(j) = h;
      Eigen::VectorXd minus = plus;
      minus(j) = -h;
      g(i, j) = g(j, i) = hbar * (defect(plus) - defect(minus)) / (8 * h * h);
    }
  }
  return g;
}

}  // namespace

MetricTensor fubini_study_metric(const fock::FockSpace& space, const fock::StateVector& fiducial,
                                 const std::vector<std::size_t>& shifted, const PhasePoint& point, double step,
                                 const Gauge& gauge, double leakage_bound) {
  if (!(step > 0)) throw Error(ErrorKind::kStepTooLarge, "metric step must be positive");
  const Eigen::MatrixXd coarse = metric_at_step(space, fiducial, shifted, point, step, gauge, leakage_bound);
  const Eigen::MatrixXd fine = metric_at_step(space, fiducial, shifted, point, step / 2, gauge, leakage_bound);
  MetricTensor out;
  out.step = step;
  out.richardson_change = (fine - coarse).cwiseAbs().maxCoeff();
  out.matrix = (4 * fine - coarse) / 3;
  const double scale = std::max(1.0, out.matrix.cwiseAbs().maxCoeff());
  if (out.richardson_change > 1e-3 * scale) {
    std::ostringstream os;
    os << "metric step " << step << " is outside the asymptotic range (halving changed an entry by "
       << out.richardson_change << ")";
    throw Error(ErrorKind::kStepTooLarge, os.str());
  }
  return out;
}

dynamics::ReducedSystem reduced_system(const dsl::CheckedModel& model) {
  const ScalarPoly h = wcp_symbolic(model.hamiltonian, model.fiducial, model.shifted);
  std::vector<std::pair<Atom, Atom>> coords;
  for (const auto& [set, index] : model.shifted_modes()) {
    coords.emplace_back(shift_atom(set, GeneratorKind::kMomentum, index), shift_atom(set, GeneratorKind::kPosition, index));
  }
  Binding b = model.binding;
  b[Atom::hbar()] = model_hbar(model);
  return dynamics::ReducedSystem(h, std::move(coords), b);
}

Evolution evolve_model(const dsl::CheckedModel& model, const PhasePoint& start, const dynamics::TimeGrid& grid,
                       const NumericOptions& options) {
  const NumericModel nm = prepare(model, options);
  const auto psi0 = coherent(nm, start);
  dynamics::Observables obs;
  for (std::size_t k : nm.shifted) obs.push_back(fock::build_generators(nm.space, k));
  Evolution out;
  out.full = dynamics::schrodinger_evolve(nm.hamiltonian, psi0.state, grid, obs, nm.space.hbar());
  out.reduced = dynamics::reduced_evolve(reduced_system(model), start.p, start.q, grid);
  out.deviation = dynamics::compare_trajectories(out.full, out.reduced);
  return out;
}

}  // namespace eqlab::correspondence
