#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqlab/fock.hpp"
#include "eqlab/scalar.hpp"

namespace eqlab::dynamics {

struct TimeGrid {
  double dt = 1e-2;
  double horizon = 10.0;

  int steps() const;
  double time(int k) const { return k * dt; }
};

/// Samples on a uniform grid. Reduced runs fill p/q, full runs fill
/// q_exp/p_exp and norm; both fill energy. Inner vectors are per mode.
struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> p, q;
  std::vector<std::vector<double>> q_exp, p_exp;
  std::vector<double> norm, energy;

  // t, p..., q..., Qexp..., Pexp..., norm, energy (absent columns skipped).
  std::string to_csv() const;
  double energy_drift() const;  // max |E(t) - E(0)| / max(1, |E(0)|)
  double norm_drift() const;
};

// Reduced trajectory columns joined with the full run's expectations, norm and energy.
Trajectory merge(const Trajectory& full, const Trajectory& reduced);

// Q and P matrices of one mode, for expectation logging.
using Observables = std::vector<std::pair<fock::MatrixOp, fock::MatrixOp>>;

// i hbar d/dt psi = H psi, one exponential action per grid step. Throws
// kStepRejected when a step loses more than 1e-10 of norm.
Trajectory schrodinger_evolve(const fock::MatrixOp& h, const fock::StateVector& psi0, const TimeGrid& grid,
                              const Observables& observables, double hbar);

/// Hamilton's equations for a polynomial H(p, q) with exact gradients.
/// Separable H uses leapfrog, otherwise implicit midpoint; either base
/// step is raised to eighth order by symmetric triple-jump composition.
class ReducedSystem {
 public:
  // `coordinates` pairs (momentum atom, position atom) per mode; every
  // other atom must be bound.
  ReducedSystem(const ScalarPoly& h, std::vector<std::pair<Atom, Atom>> coordinates, const Binding& binding);

  std::size_t modes() const { return coords_.size(); }
  bool separable() const { return separable_; }
  double energy(const std::vector<double>& p, const std::vector<double>& q) const;
  // One composed step of size h (negative h runs backwards).
  void step(std::vector<double>& p, std::vector<double>& q, double h) const;

  struct Compiled {
    struct Term {
      double coeff;
      std::vector<std::pair<int, int>> powers;  // (variable, exponent)
    };
    std::vector<Term> terms;
    double eval(const std::vector<double>& x) const;
  };

 private:
  void base_step(std::vector<double>& p, std::vector<double>& q, double h) const;
  void composed(std::vector<double>& p, std::vector<double>& q, double h, int order) const;
  std::vector<double> pack(const std::vector<double>& p, const std::vector<double>& q) const;

  std::vector<std::pair<Atom, Atom>> coords_;
  Compiled h_;
  std::vector<Compiled> dh_dp_, dh_dq_;
  bool separable_ = true;
};

inline constexpr int kReducedOrder = 8;

Trajectory reduced_evolve(const ReducedSystem& system, const std::vector<double>& p0, const std::vector<double>& q0,
                          const TimeGrid& grid);

struct DeviationReport {
  std::vector<double> t;
  std::vector<std::vector<double>> dq, dp;  // per sample, per mode
  double max_dq = 0, max_dp = 0, rms_dq = 0, rms_dp = 0;

  nlohmann::ordered_json to_json() const;
};

// Uses quantum expectations where present, otherwise p/q. Throws kGridMismatch.
DeviationReport compare_trajectories(const Trajectory& full, const Trajectory& reduced);

}  // namespace eqlab::dynamics
