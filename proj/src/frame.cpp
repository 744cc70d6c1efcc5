#include "eqlab/frame.hpp"

#include <bit>

#include "eqlab/errors.hpp"

namespace eqlab {

LinearForm conjugate(const LinearForm& form) {
  LinearForm out;
  for (const auto& [g, c] : form) out.emplace(g, c.conj());
  return out;
}

OperatorExpr to_operator(const LinearForm& form) {
  OperatorExpr out;
  for (const auto& [g, c] : form) out.add_term(Word{g}, c);
  return out;
}

std::optional<LinearForm> as_linear_form(const OperatorExpr& e) {
  LinearForm out;
  for (const auto& [w, c] : e.terms()) {
    if (w.size() != 1) return std::nullopt;
    out.emplace(w[0], c);
  }
  return out;
}

ScalarPoly commutator_over_hbar(const LinearForm& a, const LinearForm& b) {
  ScalarPoly out;
  for (const auto& [ga, ca] : a) {
    for (const auto& [gb, cb] : b) {
      const int sign = commutator_sign(ga, gb);
      if (sign != 0) out += ca * cb * ScalarPoly(ComplexRational(0, sign));
    }
  }
  return out;
}

ScalarPoly determinant(const ScalarMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) return ScalarPoly(1);
  if (n > 20) throw Error(ErrorKind::kInvalidModel, "determinant: matrix too large for exact expansion");
  // minors[mask] = det of rows 0..popcount(mask)-1 restricted to columns in mask.
  std::vector<ScalarPoly> minors(std::size_t{1} << n);
  minors[0] = ScalarPoly(1);
  for (std::size_t mask = 1; mask < minors.size(); ++mask) {
    const int row = std::popcount(mask) - 1;
    ScalarPoly acc;
    // Laplace expansion along `row`; sign from the column's rank in mask.
    for (std::size_t col = 0; col < n; ++col) {
      if (!(mask & (std::size_t{1} << col))) continue;
      const int rank_from_right = std::popcount(mask >> (col + 1));
      const ScalarPoly& entry = m[row][col];
      if (!entry.is_zero()) {
        ScalarPoly term = entry * minors[mask & ~(std::size_t{1} << col)];
        if (rank_from_right % 2 == 0) {
          acc += term;
        } else {
          acc -= term;
        }
      }
    }
    minors[mask] = std::move(acc);
  }
  return minors.back();
}

std::optional<int> decide_sign(const ScalarPoly& s) {
  if (s.is_zero()) return 0;
  bool all_positive = true;
  bool all_negative = true;
  for (const auto& [m, c] : s.terms()) {
    if (!c.is_real()) return std::nullopt;
    const int sign = sgn(c.real());
    if (sign < 0) all_positive = false;
    if (sign > 0) all_negative = false;
  }
  if (all_positive) return 1;
  if (all_negative) return -1;
  return std::nullopt;
}

namespace {

std::optional<Rational> exact_sqrt(const Rational& value) {
  if (sgn(value) < 0) return std::nullopt;
  const mpz_class num = value.get_num();
  const mpz_class den = value.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) {
    return std::nullopt;
  }
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  return Rational(rn, rd);
}

std::optional<ScalarPoly> exact_sqrt(const ScalarPoly& value) {
  if (value.size() != 1) return std::nullopt;
  const auto& [m, c] = *value.terms().begin();
  if (!c.is_real()) return std::nullopt;
  auto root = exact_sqrt(c.real());
  if (!root) return std::nullopt;
  Monomial half;
  for (const auto& [a, e] : m.factors()) {
    if (e % 2 != 0) return std::nullopt;
    half = half * Monomial(a, e / 2);
  }
  return ScalarPoly(half, ComplexRational(*root));
}

}  // namespace

FiducialFrame::FiducialFrame(std::string name, std::vector<LinearForm> annihilators)
    : name_(std::move(name)), annihilators_(std::move(annihilators)) {
  const std::size_t k = annihilators_.size();
  if (k == 0) throw Error(ErrorKind::kInvalidModel, "frame '" + name_ + "' has no annihilators");
  for (auto& form : annihilators_) {
    for (auto it = form.begin(); it != form.end();) {
      it = it->second.is_zero() ? form.erase(it) : std::next(it);
    }
    for (const auto& entry : form) span_.insert(entry.first);
  }

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (!commutator_over_hbar(annihilators_[i], annihilators_[j]).is_zero()) {
        throw Error(ErrorKind::kNonCommutingFrame, "frame '" + name_ + "': annihilators " + std::to_string(i) +
                                                       " and " + std::to_string(j) + " do not commute");
      }
    }
  }

  // Coefficient rows are independent iff det(C C^dag) is not identically zero.
  {
    ScalarMatrix euclid(k, std::vector<ScalarPoly>(k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        for (const auto& [g, c] : annihilators_[i]) {
          auto it = annihilators_[j].find(g);
          if (it != annihilators_[j].end()) euclid[i][j] = euclid[i][j] + c * it->second.conj();
        }
      }
    }
    if (determinant(euclid).is_zero()) {
      throw Error(ErrorKind::kDependentFiducialConditions,
                  "frame '" + name_ + "': annihilation conditions are linearly dependent");
    }
  }

  gram_.assign(k, std::vector<ScalarPoly>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      gram_[i][j] = commutator_over_hbar(annihilators_[i], conjugate(annihilators_[j]));
    }
  }

  // Sylvester's criterion on the leading principal minors.
  for (std::size_t n = 1; n <= k; ++n) {
    ScalarMatrix leading(n, std::vector<ScalarPoly>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) leading[i][j] = gram_[i][j];
    }
    const ScalarPoly minor = determinant(leading);
    const auto sign = decide_sign(minor);
    if (!sign) {
      throw Error(ErrorKind::kGramNotPositiveDefinite,
                  "frame '" + name_ + "': cannot decide the sign of Gram minor " + to_string(minor) +
                      "; bind the parameters to rational values");
    }
    if (*sign <= 0) {
      throw Error(ErrorKind::kGramNotPositiveDefinite, "frame '" + name_ + "': Gram matrix is not positive definite (leading minor " +
                                                           std::to_string(n) + " = " + to_string(minor) + ")");
    }
  }

  const std::vector<Generator> gens(span_.begin(), span_.end());
  if (gens.size() != 2 * k) {
    throw Error(ErrorKind::kDependentFiducialConditions,
                "frame '" + name_ + "': " + std::to_string(k) + " annihilators must span exactly " +
                    std::to_string(2 * k) + " generators, found " + std::to_string(gens.size()));
  }

  // Rows: b_0..b_{k-1}, b_0^dag..b_{k-1}^dag in terms of the generators.
  // Gauss-Jordan on [A | I] yields gens = A^{-1} * letters.
  const std::size_t n = 2 * k;
  ScalarMatrix a(n, std::vector<ScalarPoly>(n));
  ScalarMatrix inv(n, std::vector<ScalarPoly>(n));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < n; ++c) {
      auto it = annihilators_[i].find(gens[c]);
      if (it == annihilators_[i].end()) continue;
      a[i][c] = it->second;
      a[k + i][c] = it->second.conj();
    }
  }
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = ScalarPoly(1);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    bool any_nonzero = false;
    for (std::size_t r = col; r < n; ++r) {
      if (a[r][col].is_zero()) continue;
      any_nonzero = true;
      if (a[r][col].inverse()) {
        pivot = r;
        break;
      }
    }
    if (!any_nonzero) {
      throw Error(ErrorKind::kDependentFiducialConditions,
                  "frame '" + name_ + "': annihilation conditions are linearly dependent");
    }
    if (pivot == n) {
      throw Error(ErrorKind::kFrameInversion,
                  "frame '" + name_ + "': inversion needs division by a multi-term expression; bind the "
                  "parameters to rational values");
    }
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const ScalarPoly scale = *a[col][col].inverse();
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] = a[col][c] * scale;
      inv[col][c] = inv[col][c] * scale;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      const ScalarPoly factor = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        if (!a[col][c].is_zero()) a[r][c] -= factor * a[col][c];
        if (!inv[col][c].is_zero()) inv[r][c] -= factor * inv[col][c];
      }
    }
  }

  // inv is A^{-1}: generator gens[c] = sum_r inv[c][r] * letter_r.
  for (std::size_t c = 0; c < n; ++c) {
    LadderExpansion e;
    e.annihilation.assign(inv[c].begin(), inv[c].begin() + static_cast<long>(k));
    e.creation.assign(inv[c].begin() + static_cast<long>(k), inv[c].end());
    expansion_.emplace(gens[c], std::move(e));
  }
}

const FiducialFrame::LadderExpansion& FiducialFrame::expansion(const Generator& g) const {
  auto it = expansion_.find(g);
  if (it == expansion_.end()) {
    throw Error(ErrorKind::kFrameSpan, "generator " + to_string(g) + " lies outside the span of frame '" + name_ + "'");
  }
  return it->second;
}

std::optional<ScalarMatrix> FiducialFrame::normalized_gram() const {
  const std::size_t k = size();
  ScalarMatrix out(k, std::vector<ScalarPoly>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      auto root = exact_sqrt(gram_[i][i] * gram_[j][j]);
      if (!root) return std::nullopt;
      out[i][j] = gram_[i][j] * *root->inverse();
    }
  }
  return out;
}

std::string to_string(const LinearForm& form) { return to_string(to_operator(form)); }

}  // namespace eqlab
