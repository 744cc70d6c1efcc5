#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "eqlab/frame.hpp"
#include "eqlab/operator_expr.hpp"
#include "eqlab/scalar.hpp"

namespace eqlab::fock {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Vector = Eigen::VectorXcd;

struct FockMode {
  OperatorSet set = OperatorSet::kPQ;
  int index = 0;
  int dim = 64;
  double omega = 1.0;  // basis frequency, numerical choice only
};

/// Tensor product of truncated single-mode spaces. Basis index is row-major
/// over occupations: the last mode varies fastest.
class FockSpace {
 public:
  FockSpace(std::vector<FockMode> modes, double hbar);

  const std::vector<FockMode>& modes() const { return modes_; }
  double hbar() const { return hbar_; }
  long dim() const { return dim_; }
  long stride(std::size_t k) const { return strides_[k]; }
  // Position of (set, index) in modes(); nullopt if absent.
  std::optional<std::size_t> find(OperatorSet set, int index) const;
  std::vector<int> occupations(long basis_index) const;
  long basis_index(const std::vector<int>& occupations) const;

 private:
  std::vector<FockMode> modes_;
  std::vector<long> strides_;
  double hbar_;
  long dim_ = 1;
};

struct MatrixOp {
  SparseMatrix matrix;
  bool hermitian = false;
  OperatorExpr provenance;
};

struct StateVector {
  Vector amplitudes;
  bool normalized = false;
};

// Single-mode truncated ladder operator, a|n> = sqrt(n)|n-1>.
SparseMatrix annihilator(int dim);
// (Q, P) acting on mode `mode` of the full space.
std::pair<MatrixOp, MatrixOp> build_generators(const FockSpace& space, std::size_t mode);
// Coefficients are evaluated with `binding`; hbar is taken from the space.
MatrixOp build_operator(const OperatorExpr& e, const FockSpace& space, const Binding& binding = {});
std::vector<MatrixOp> build_conditions(const FiducialFrame& frame, const FockSpace& space, const Binding& binding = {});

Complex expectation(const MatrixOp& a, const StateVector& v);
Complex expectation(const SparseMatrix& a, const Vector& v);

// exp(factor * A) v by scaled Taylor series.
Vector expm_action(const SparseMatrix& a, const Vector& v, Complex factor);

struct FiducialResult {
  StateVector state;
  double residual = 0.0;  // sqrt(sum_i |b_i v|^2)
  double ground = 0.0;    // lowest eigenvalue of K = sum b^dag b
  double gap = 0.0;
};

// Ground vector of K = sum_i b_i^dag b_i. Throws kDegenerateGroundSpace if the
// gap to the next eigenvalue is below 1e-10. Phase fixed so the largest
// component is real and positive.
FiducialResult fiducial_solve(const std::vector<MatrixOp>& conditions, const FockSpace& space);

inline constexpr double kDefaultLeakageBound = 1e-6;

struct CoherentResult {
  StateVector state;
  double leakage = 0.0;  // norm correction plus top-level population
};

// exp(-i sum q_n P_n / hbar) exp(i sum p_n Q_n / hbar) |fiducial>. `p` and `q`
// are indexed like `shifted_modes` (positions in space.modes()). Throws
// kTruncationLeakage when leakage exceeds `bound`.
CoherentResult coherent_state(const FockSpace& space, const StateVector& fiducial, const std::vector<double>& p,
                              const std::vector<double>& q, const std::vector<std::size_t>& shifted_modes,
                              double bound = kDefaultLeakageBound);

// Population in basis states with some mode at its top occupation.
double edge_population(const FockSpace& space, const Vector& v);

// One line per amplitude: index real imag.
void dump(std::ostream& os, const Vector& v);
void dump(std::ostream& os, const SparseMatrix& m);

}  // namespace eqlab::fock
