#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqlab/dsl/ast.hpp"
#include "eqlab/frame.hpp"
#include "eqlab/normal_order.hpp"

namespace eqlab::dsl {

inline constexpr int kDefaultTruncation = 64;
inline constexpr int kMinTruncation = 4;

/// A model whose frames, Hamiltonian and truncation passed validation. The
/// Hamiltonian is canonicalized with `:[...]:` regions already expanded.
/// Bound parameters (other than hbar) are substituted; hbar stays symbolic
/// and its value, if any, lives in `binding`.
struct CheckedModel {
  ModelSpec spec;
  OperatorExpr hamiltonian;
  std::map<std::string, std::shared_ptr<const FiducialFrame>> frames;
  std::shared_ptr<const FiducialFrame> fiducial;
  std::set<OperatorSet> shifted;
  std::vector<std::pair<OperatorSet, int>> modes;  // generator order
  int truncation = kDefaultTruncation;
  double omega_rep = 1.0;
  Binding binding;

  int total_modes() const { return static_cast<int>(modes.size()); }
  // Modes of the shifted sets, in generator order; these index p and q.
  std::vector<std::pair<OperatorSet, int>> shifted_modes() const;
};

// Lowers an expression against the model: bound parameters become numbers,
// regions become the Wick-ordered operator in their frame. Throws
// Error(kInvalidModel) for division by an operator or a multi-term scalar.
OperatorExpr lower(const Ast& node, const ModelSpec& spec,
                   const std::map<std::string, std::shared_ptr<const FiducialFrame>>& frames);

// Builds frames and checks every model invariant. Throws eqlab::Error with
// kGramNotPositiveDefinite, kNonHermitianHamiltonian,
// kDependentFiducialConditions, kNonCommutingFrame or kInvalidModel.
CheckedModel validate(const ModelSpec& spec);

// Sets (or adds) a parameter value.
void override_parameter(ModelSpec& spec, const std::string& name, const Rational& value);

}  // namespace eqlab::dsl
