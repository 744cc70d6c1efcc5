#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqlab/dsl/model.hpp"
#include "eqlab/dynamics.hpp"
#include "eqlab/fock.hpp"

namespace eqlab::correspondence {

// Momenta and positions for the shifted modes, in CheckedModel::shifted_modes() order.
struct PhasePoint {
  std::vector<double> p;
  std::vector<double> q;
};

struct NumericOptions {
  std::optional<int> truncation;   // per-mode D; model value otherwise
  std::optional<double> omega_rep;  // basis frequency; model value otherwise
  double leakage_bound = fock::kDefaultLeakageBound;
};

/// Everything needed to evaluate coherent-state expectations of a model.
struct NumericModel {
  fock::FockSpace space;
  fock::MatrixOp hamiltonian;
  fock::FiducialResult fiducial;
  std::vector<std::size_t> shifted;  // positions in space.modes()
  Binding binding;                   // model binding plus hbar
  double leakage_bound = fock::kDefaultLeakageBound;
};

// hbar defaults to 1 when the model leaves it unbound.
double model_hbar(const dsl::CheckedModel& model);
fock::FockSpace make_space(const dsl::CheckedModel& model, const NumericOptions& options = {});
NumericModel prepare(const dsl::CheckedModel& model, const NumericOptions& options = {});

// Binding for the shift atoms (q[n], p[n] or s[n], r[n]) at a phase point.
Binding point_binding(const dsl::CheckedModel& model, const PhasePoint& point);

fock::CoherentResult coherent(const NumericModel& nm, const PhasePoint& point);
// <0| H(P + p, Q + q) |0>, built as a displaced operator.
double displaced_expectation(const dsl::CheckedModel& model, const NumericModel& nm, const OperatorExpr& h,
                             const PhasePoint& point);

struct WcpPoint {
  PhasePoint point;
  double numeric = 0;
  double symbolic = 0;
  double abs_dev = 0;
  double rel_dev = 0;
  double leakage = 0;
  bool flagged = false;  // leakage above bound; numbers kept for inspection
};

struct WcpReport {
  std::string model_id;
  std::vector<std::string> coordinates;  // p names then q names
  std::vector<int> truncation;
  double omega_rep = 1;
  double fiducial_residual = 0;
  std::string symbolic_rendered;
  std::vector<WcpPoint> points;

  double max_abs_dev() const;
  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

WcpReport wcp_numeric(const dsl::CheckedModel& model, const std::vector<PhasePoint>& points,
                      const NumericOptions& options = {}, const std::string& model_id = "");

// Classical part (hbar-degree 0) and the remainder.
std::pair<ScalarPoly, ScalarPoly> hbar_split(const ScalarPoly& h);

// Cartesian grid with `per_axis` points on [-range, range] for every coordinate.
std::vector<PhasePoint> grid(std::size_t modes, int per_axis, double range);

struct MetricTensor {
  Eigen::MatrixXd matrix;  // coordinates (p_1..p_N, q_1..q_N)
  double step = 0;
  double richardson_change = 0;  // max entry change between step and step/2

  nlohmann::ordered_json to_json(const std::vector<std::string>& coordinates = {}) const;
};

inline constexpr double kDefaultMetricStep = 1e-3;

// Phase angle applied to each coherent state before overlaps; the metric
// must not depend on it.
using Gauge = std::function<double(const PhasePoint&)>;

// 2 hbar times the Fubini-Study metric of the coherent-state map, from
// overlaps 1 - |<psi(x - d)|psi(x + d)>|^2 with Richardson extrapolation.
// Throws kStepTooLarge when halving the step changes an entry by more than
// 1e-3 relative.
MetricTensor fubini_study_metric(const fock::FockSpace& space, const fock::StateVector& fiducial,
                                 const std::vector<std::size_t>& shifted, const PhasePoint& point,
                                 double step = kDefaultMetricStep, const Gauge& gauge = {},
                                 double leakage_bound = fock::kDefaultLeakageBound);

struct Evolution {
  dynamics::Trajectory full;
  dynamics::Trajectory reduced;
  dynamics::DeviationReport deviation;
};

// Full Schrodinger run from the coherent state at `start` and the reduced
// run of wcp_symbolic(H) from the same phase point.
Evolution evolve_model(const dsl::CheckedModel& model, const PhasePoint& start, const dynamics::TimeGrid& grid,
                       const NumericOptions& options = {});

// Reduced system for the model's wcp_symbolic Hamiltonian.
dynamics::ReducedSystem reduced_system(const dsl::CheckedModel& model);

}  // namespace eqlab::correspondence
