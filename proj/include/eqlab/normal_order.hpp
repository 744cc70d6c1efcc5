#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "eqlab/frame.hpp"
#include "eqlab/operator_expr.hpp"

namespace eqlab {

/// b_index or b_index^dag of a frame.
struct LadderLetter {
  bool dagger = false;
  int index = 0;

  // Creation letters sort before annihilation letters.
  auto operator<=>(const LadderLetter& o) const {
    if (dagger != o.dagger) return dagger ? std::strong_ordering::less : std::strong_ordering::greater;
    return index <=> o.index;
  }
  bool operator==(const LadderLetter&) const = default;
};

// Always kept sorted: creators (by index) first, then annihilators.
using LadderWord = std::vector<LadderLetter>;

/// Operator written in normal order with respect to a frame: a sum of
/// ladder words with every b^dag to the left of every b. Vacuum expectations
/// of nonempty words vanish, so the fiducial expectation is the scalar part.
class NormalOrderedExpr {
 public:
  using TermMap = std::map<LadderWord, ScalarPoly>;

  explicit NormalOrderedExpr(std::shared_ptr<const FiducialFrame> frame) : frame_(std::move(frame)) {}

  const FiducialFrame& frame() const { return *frame_; }
  const std::shared_ptr<const FiducialFrame>& frame_ptr() const { return frame_; }
  const TermMap& terms() const { return terms_; }
  ScalarPoly scalar_part() const;

  void add_term(const LadderWord& word, const ScalarPoly& coeff);
  NormalOrderedExpr& operator+=(const NormalOrderedExpr& o);

  // Drops the scalar part: what is left equals :X: for some generator
  // polynomial X.
  NormalOrderedExpr without_scalar() const;

  friend bool operator==(const NormalOrderedExpr& a, const NormalOrderedExpr& b) {
    return *a.frame_ == *b.frame_ && a.terms_ == b.terms_;
  }

 private:
  std::shared_ptr<const FiducialFrame> frame_;
  TermMap terms_;
};

// Operator-identity rewrite of e into normal order in frame f; contraction
// terms b_i b_j^dag = b_j^dag b_i + hbar M_ij are kept. Throws kFrameSpan.
NormalOrderedExpr normal_order(const OperatorExpr& e, const std::shared_ptr<const FiducialFrame>& f);

// The normal-ordering map :e: of the commutative symbol of e: every
// generator is expanded in ladder letters which are then reordered without
// contractions. Depends only on the symbol, so :QP: = :PQ:.
NormalOrderedExpr wick(const OperatorExpr& e, const std::shared_ptr<const FiducialFrame>& f);

// Maps ladder words back to (canonicalized) generator words.
OperatorExpr to_operator(const NormalOrderedExpr& n);

// Commutative generator polynomial X with :X: = n (requires no scalar part
// to be meaningful; the scalar part is carried along as a constant).
OperatorExpr symbol(const NormalOrderedExpr& n);

NormalOrderedExpr adjoint(const NormalOrderedExpr& n);

// b_i -> b_i + beta_i with beta_i = sum_g c_ig shift(g).
NormalOrderedExpr displace(const NormalOrderedExpr& n, const ShiftMap& shifts);

// Vacuum expectation in the frame's fiducial vector.
ScalarPoly fiducial_expectation(const NormalOrderedExpr& n);
// Always throws kNotNormalOrdered: a plain OperatorExpr carries no frame.
[[noreturn]] ScalarPoly fiducial_expectation(const OperatorExpr& e);

// Weak-correspondence symbol H(p,q): normal order, displace the listed sets,
// take the fiducial expectation. Throws kHermiticity for non-Hermitian H.
ScalarPoly wcp_symbolic(const OperatorExpr& h, const std::shared_ptr<const FiducialFrame>& f,
                        const std::set<OperatorSet>& shifted_sets);

std::string to_string(const LadderWord& word);
std::string to_string(const NormalOrderedExpr& n);
// Round-trippable rendering ":[ X ]: @frame + c" in generator syntax.
std::string render_generator_form(const NormalOrderedExpr& n);

}  // namespace eqlab
