#include "eqlab/fock.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "eqlab/errors.hpp"

namespace eqlab::fock {

FockSpace::FockSpace(std::vector<FockMode> modes, double hbar) : modes_(std::move(modes)), hbar_(hbar) {
  if (!(hbar_ > 0)) throw Error(ErrorKind::kInvalidModel, "hbar must be positive");
  strides_.assign(modes_.size(), 1);
  for (std::size_t k = modes_.size(); k-- > 0;) {
    if (modes_[k].dim < 1) throw Error(ErrorKind::kInvalidModel, "truncation must be positive");
    if (!(modes_[k].omega > 0)) throw Error(ErrorKind::kInvalidModel, "basis frequency must be positive");
    strides_[k] = dim_;
    dim_ *= modes_[k].dim;
  }
}

std::optional<std::size_t> FockSpace::find(OperatorSet set, int index) const {
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    if (modes_[k].set == set && modes_[k].index == index) return k;
  }
  return std::nullopt;
}

std::vector<int> FockSpace::occupations(long basis_index) const {
  std::vector<int> occ(modes_.size());
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    occ[k] = static_cast<int>((basis_index / strides_[k]) % modes_[k].dim);
  }
  return occ;
}

long FockSpace::basis_index(const std::vector<int>& occupations) const {
  long idx = 0;
  for (std::size_t k = 0; k < modes_.size(); ++k) idx += occupations[k] * strides_[k];
  return idx;
}

SparseMatrix annihilator(int dim) {
  SparseMatrix a(dim, dim);
  std::vector<Eigen::Triplet<Complex>> t;
  for (int n = 1; n < dim; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

namespace {

SparseMatrix single_mode(const FockMode& mode, double hbar, GeneratorKind kind) {
  const SparseMatrix a = annihilator(mode.dim);
  const SparseMatrix ad = SparseMatrix(a.adjoint());
  if (kind == GeneratorKind::kPosition) {
    return std::sqrt(hbar / (2 * mode.omega)) * (a + ad);
  }
  return Complex(0, std::sqrt(hbar * mode.omega / 2)) * (ad - a);
}

SparseMatrix identity(long n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

// Appends c * (M_0 kron M_1 kron ...) to `out`; null factors are identities.
void kron_append(const FockSpace& space, const std::vector<const SparseMatrix*>& factors, Complex c,
                 std::vector<Eigen::Triplet<Complex>>& out) {
  std::vector<Eigen::Triplet<Complex>> cur{{0, 0, c}};
  std::vector<Eigen::Triplet<Complex>> next;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const long d = space.modes()[k].dim;
    next.clear();
    for (const auto& e : cur) {
      if (!factors[k]) {
        for (long i = 0; i < d; ++i) next.emplace_back(e.row() * d + i, e.col() * d + i, e.value());
        continue;
      }
      const SparseMatrix& m = *factors[k];
      for (int col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
          next.emplace_back(e.row() * d + it.row(), e.col() * d + col, e.value() * it.value());
        }
      }
    }
    cur.swap(next);
  }
  out.insert(out.end(), cur.begin(), cur.end());
}

double one_norm(const SparseMatrix& a) {
  double best = 0;
  for (int col = 0; col < a.outerSize(); ++col) {
    double s = 0;
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

std::pair<MatrixOp, MatrixOp> build_generators(const FockSpace& space, std::size_t mode) {
  const FockMode& m = space.modes().at(mode);
  const Generator q{m.set, static_cast<std::uint16_t>(m.index), GeneratorKind::kPosition};
  const Generator p{m.set, static_cast<std::uint16_t>(m.index), GeneratorKind::kMomentum};
  return {build_operator(OperatorExpr(q), space), build_operator(OperatorExpr(p), space)};
}

MatrixOp build_operator(const OperatorExpr& e, const FockSpace& space, const Binding& binding) {
  Binding full = binding;
  full[Atom::hbar()] = space.hbar();

  std::map<std::pair<std::size_t, GeneratorKind>, SparseMatrix> cache;
  auto generator_matrix = [&](const Generator& g) -> const SparseMatrix& {
    const auto k = space.find(g.set, g.mode);
    if (!k) throw Error(ErrorKind::kUnknownGenerator, "generator " + to_string(g) + " is not in the Fock space");
    auto key = std::make_pair(*k, g.kind);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, single_mode(space.modes()[*k], space.hbar(), g.kind)).first;
    return it->second;
  };

  std::vector<Eigen::Triplet<Complex>> triplets;
  for (const auto& [word, coeff] : e.terms()) {
    const Complex c = coeff.evaluate(full);
    if (c == Complex(0)) continue;
    std::vector<std::optional<SparseMatrix>> per_mode(space.modes().size());
    for (const auto& g : word) {
      const SparseMatrix& gm = generator_matrix(g);
      auto& slot = per_mode[*space.find(g.set, g.mode)];
      if (slot) {
        slot = SparseMatrix(*slot * gm);
      } else {
        slot = gm;
      }
    }
    std::vector<const SparseMatrix*> factors;
    for (const auto& s : per_mode) factors.push_back(s ? &*s : nullptr);
    kron_append(space, factors, c, triplets);
  }

  MatrixOp op;
  op.matrix = SparseMatrix(space.dim(), space.dim());
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.hermitian = hermitian_check(e);
  if (op.hermitian) op.matrix = 0.5 * (op.matrix + SparseMatrix(op.matrix.adjoint()));
  op.matrix.prune(Complex(0));
  op.matrix.makeCompressed();
  op.provenance = e;
  return op;
}

std::vector<MatrixOp> build_conditions(const FiducialFrame& frame, const FockSpace& space, const Binding& binding) {
  std::vector<MatrixOp> out;
  for (const auto& form : frame.annihilators()) out.push_back(build_operator(to_operator(form), space, binding));
  return out;
}

Complex expectation(const SparseMatrix& a, const Vector& v) {
  if (a.rows() != v.size() || a.cols() != v.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "operator of size " + std::to_string(a.rows()) +
                                                   " applied to vector of size " + std::to_string(v.size()));
  }
  return v.dot(a * v);
}

Complex expectation(const MatrixOp& a, const StateVector& v) {
  const Complex z = expectation(a.matrix, v.amplitudes);
  return a.hermitian ? Complex(z.real(), 0) : z;
}

Vector expm_action(const SparseMatrix& a, const Vector& v, Complex factor) {
  const double norm = one_norm(a) * std::abs(factor);
  const int steps = std::max(1, static_cast<int>(std::ceil(norm)));
  const Complex h = factor / static_cast<double>(steps);
  Vector out = v;
  for (int s = 0; s < steps; ++s) {
    Vector term = out;
    Vector sum = out;
    int small = 0;
    for (int k = 1; k < 80; ++k) {
      term = (h / static_cast<double>(k)) * (a * term);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) {
        if (++small == 2) break;
      } else {
        small = 0;
      }
    }
    out = sum;
  }
  return out;
}

FiducialResult fiducial_solve(const std::vector<MatrixOp>& conditions, const FockSpace& space) {
  if (conditions.empty()) throw Error(ErrorKind::kInvalidModel, "no fiducial conditions");
  const long n = space.dim();
  SparseMatrix k(n, n);
  for (const auto& b : conditions) {
    if (b.matrix.rows() != n) throw Error(ErrorKind::kDimensionMismatch, "condition size does not match the space");
    k += SparseMatrix(b.matrix.adjoint() * b.matrix);
  }
  k = 0.5 * (k + SparseMatrix(k.adjoint()));

  const double shift = 1e-3;
  SparseMatrix shifted = k + shift * identity(n);
  Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::kDegenerateGroundSpace, "factorization failed");

  const long block = std::min<long>(4, n);
  Eigen::MatrixXcd x(n, block);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  for (long j = 0; j < block; ++j) {
    for (long i = 0; i < n; ++i) x(i, j) = Complex(gauss(rng), gauss(rng)) * 1e-3;
  }
  x(0, 0) += 1.0;

  Eigen::VectorXd ritz = Eigen::VectorXd::Zero(block);
  double prev_second = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::MatrixXcd y(n, block);
    for (long j = 0; j < block; ++j) y.col(j) = solver.solve(x.col(j));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(y);
    x = qr.householderQ() * Eigen::MatrixXcd::Identity(n, block);
    const Eigen::MatrixXcd kx = k * x;
    Eigen::MatrixXcd h = x.adjoint() * kx;
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    ritz = es.eigenvalues();
    x = (x * es.eigenvectors()).eval();
    const Vector r = k * x.col(0) - ritz(0) * x.col(0);
    const double scale = std::max(1.0, block > 1 ? std::abs(ritz(1)) : 1.0);
    const double second = block > 1 ? ritz(1) : 0.0;
    const bool second_settled = block == 1 || std::abs(second - prev_second) <= 1e-12 * scale;
    prev_second = second;
    if (r.norm() <= 1e-13 * scale && second_settled) break;
  }

  FiducialResult out;
  Vector v = x.col(0);
  // Clear roundoff-level components, then fix the global phase.
  const double vmax = v.cwiseAbs().maxCoeff();
  for (long i = 0; i < n; ++i) {
    if (std::abs(v(i)) < 1e-15 * vmax) v(i) = 0;
  }
  long arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  v *= std::conj(v(arg)) / std::abs(v(arg));
  v(arg) = Complex(v(arg).real(), 0);
  v.normalize();

  double res2 = 0;
  for (const auto& b : conditions) res2 += (b.matrix * v).squaredNorm();
  out.residual = std::sqrt(res2);
  out.ground = ritz(0);
  out.gap = block > 1 ? ritz(1) - ritz(0) : std::numeric_limits<double>::infinity();
  if (out.gap < 1e-10) {
    throw Error(ErrorKind::kDegenerateGroundSpace,
                "fiducial conditions do not fix a unique state (gap " + std::to_string(out.gap) + ")");
  }
  out.state = {v, true};
  return out;
}

double edge_population(const FockSpace& space, const Vector& v) {
  double pop = 0;
  for (long i = 0; i < v.size(); ++i) {
    const auto occ = space.occupations(i);
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (occ[k] == space.modes()[k].dim - 1) {
        pop += std::norm(v(i));
        break;
      }
    }
  }
  return pop;
}

CoherentResult coherent_state(const FockSpace& space, const StateVector& fiducial, const std::vector<double>& p,
                              const std::vector<double>& q, const std::vector<std::size_t>& shifted_modes,
                              double bound) {
  if (p.size() != shifted_modes.size() || q.size() != shifted_modes.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "phase point has " + std::to_string(p.size()) + "/" +
                                                   std::to_string(q.size()) + " coordinates for " +
                                                   std::to_string(shifted_modes.size()) + " shifted modes");
  }
  if (fiducial.amplitudes.size() != space.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "fiducial size does not match the space");
  }
  const double hbar = space.hbar();
  Vector v = fiducial.amplitudes;
  std::vector<SparseMatrix> momenta;
  for (std::size_t j = 0; j < shifted_modes.size(); ++j) {
    const FockMode& m = space.modes().at(shifted_modes[j]);
    std::vector<const SparseMatrix*> factors(space.modes().size(), nullptr);
    const SparseMatrix qm = single_mode(m, hbar, GeneratorKind::kPosition);
    const SparseMatrix pm = single_mode(m, hbar, GeneratorKind::kMomentum);
    std::vector<Eigen::Triplet<Complex>> t;
    factors[shifted_modes[j]] = &qm;
    kron_append(space, factors, 1.0, t);
    SparseMatrix qfull(space.dim(), space.dim());
    qfull.setFromTriplets(t.begin(), t.end());
    t.clear();
    factors[shifted_modes[j]] = &pm;
    kron_append(space, factors, 1.0, t);
    SparseMatrix pfull(space.dim(), space.dim());
    pfull.setFromTriplets(t.begin(), t.end());
    momenta.push_back(std::move(pfull));
    if (p[j] != 0) v = expm_action(qfull, v, Complex(0, p[j] / hbar));
  }
  for (std::size_t j = 0; j < shifted_modes.size(); ++j) {
    if (q[j] != 0) v = expm_action(momenta[j], v, Complex(0, -q[j] / hbar));
  }
  CoherentResult out;
  const double norm = v.norm();
  out.leakage = std::abs(1 - norm) + edge_population(space, v) / (norm * norm);
  v /= norm;
  out.state = {v, true};
  if (out.leakage > bound) {
    throw Error(ErrorKind::kTruncationLeakage, "coherent state leaks past the truncation (" +
                                                   std::to_string(out.leakage) + " > " + std::to_string(bound) + ")");
  }
  return out;
}

void dump(std::ostream& os, const Vector& v) {
  os << std::setprecision(17);
  for (long i = 0; i < v.size(); ++i) os << i << " " << v(i).real() << " " << v(i).imag() << "\n";
}

void dump(std::ostream& os, const SparseMatrix& m) {
  os << std::setprecision(17);
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      os << it.row() << " " << col << " " << it.value().real() << " " << it.value().imag() << "\n";
    }
  }
}

}  // namespace eqlab::fock
