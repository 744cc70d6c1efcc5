#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqlab/operator_expr.hpp"

namespace eqlab {

/// Complex-linear combination of generators, e.g. m*Q[0] + i*P[0].
using LinearForm = std::map<Generator, ScalarPoly>;
using ScalarMatrix = std::vector<std::vector<ScalarPoly>>;

LinearForm conjugate(const LinearForm& form);
OperatorExpr to_operator(const LinearForm& form);
// Extracts a linear form from a degree-1 expression without scalar part;
// nullopt otherwise.
std::optional<LinearForm> as_linear_form(const OperatorExpr& e);

// [a, b] / hbar for linear forms, an exact scalar.
ScalarPoly commutator_over_hbar(const LinearForm& a, const LinearForm& b);

// Determinant by minor expansion over column subsets.
ScalarPoly determinant(const ScalarMatrix& m);

// Sign of a real-valued scalar, treating every atom as a positive real.
// nullopt when the sign cannot be decided from the structure.
std::optional<int> decide_sign(const ScalarPoly& s);

/// A set of commuting annihilation operators b_i (raw, unnormalized), their
/// Gram matrix M_ij = [b_i, b_j^dag] / hbar and the inverse map expressing
/// each spanned generator as a combination of the b_i and b_i^dag.
///
/// Construction verifies: [b_i, b_j] = 0, M Hermitian positive definite, the
/// generator span has exactly 2K elements and the linear map is invertible.
class FiducialFrame {
 public:
  struct LadderExpansion {
    std::vector<ScalarPoly> annihilation;  // coefficient of b_i
    std::vector<ScalarPoly> creation;      // coefficient of b_i^dag
  };

  FiducialFrame(std::string name, std::vector<LinearForm> annihilators);

  const std::string& name() const { return name_; }
  std::size_t size() const { return annihilators_.size(); }
  const std::vector<LinearForm>& annihilators() const { return annihilators_; }
  const ScalarMatrix& gram() const { return gram_; }
  const std::set<Generator>& span() const { return span_; }
  bool spans(const Generator& g) const { return span_.count(g) != 0; }

  // Throws kFrameSpan for generators outside the span.
  const LadderExpansion& expansion(const Generator& g) const;

  // M_ij / sqrt(M_ii M_jj) when every entry is exactly representable.
  std::optional<ScalarMatrix> normalized_gram() const;

  bool operator==(const FiducialFrame& o) const {
    return name_ == o.name_ && annihilators_ == o.annihilators_;
  }

 private:
  std::string name_;
  std::vector<LinearForm> annihilators_;
  ScalarMatrix gram_;
  std::set<Generator> span_;
  std::map<Generator, LadderExpansion> expansion_;
};

std::string to_string(const LinearForm& form);

}  // namespace eqlab
