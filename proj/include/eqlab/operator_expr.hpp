#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqlab/scalar.hpp"

namespace eqlab {

// Canonical operator sets. "pq" holds {Q_n, P_n}; "rs" holds {S_n, R_n}
// (S plays the position role, R the momentum role). Sets commute with each
// other.
enum class OperatorSet : std::uint8_t { kPQ = 0, kRS = 1 };
enum class GeneratorKind : std::uint8_t { kPosition = 0, kMomentum = 1 };

const char* set_name(OperatorSet set);
std::optional<OperatorSet> parse_set_name(const std::string& name);
char generator_letter(OperatorSet set, GeneratorKind kind);

// Lower-case shift symbol for a generator: Q[n] -> q[n], P[n] -> p[n], ...
Atom shift_atom(OperatorSet set, GeneratorKind kind, int mode);

/// One self-adjoint canonical generator. The defaulted ordering (set, then
/// mode, then position before momentum) is the canonical word order.
struct Generator {
  OperatorSet set = OperatorSet::kPQ;
  std::uint16_t mode = 0;
  GeneratorKind kind = GeneratorKind::kPosition;

  static Generator Q(int n) { return {OperatorSet::kPQ, static_cast<std::uint16_t>(n), GeneratorKind::kPosition}; }
  static Generator P(int n) { return {OperatorSet::kPQ, static_cast<std::uint16_t>(n), GeneratorKind::kMomentum}; }
  static Generator S(int n) { return {OperatorSet::kRS, static_cast<std::uint16_t>(n), GeneratorKind::kPosition}; }
  static Generator R(int n) { return {OperatorSet::kRS, static_cast<std::uint16_t>(n), GeneratorKind::kMomentum}; }

  bool same_mode(const Generator& o) const { return set == o.set && mode == o.mode; }
  Atom shift() const { return shift_atom(set, kind, mode); }

  auto operator<=>(const Generator&) const = default;
  bool operator==(const Generator&) const = default;
};

std::string to_string(const Generator& g);

// [a, b] / (i hbar): +1 for [Q,P], -1 for [P,Q], 0 otherwise.
int commutator_sign(const Generator& a, const Generator& b);

using Word = std::vector<Generator>;

// Expressions above this total degree are rejected with kDegreeLimit.
inline constexpr int kMaxDegree = 12;

/// Noncommutative polynomial in canonical generators with ScalarPoly
/// coefficients. Duplicate words never appear; `canonical()` records whether
/// every word is sorted in generator order.
class OperatorExpr {
 public:
  using TermMap = std::map<Word, ScalarPoly>;

  OperatorExpr() = default;
  OperatorExpr(ScalarPoly scalar);  // NOLINT
  OperatorExpr(const Generator& g);  // NOLINT
  OperatorExpr(Word word, ScalarPoly coeff);

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool canonical() const { return canonical_; }
  int degree() const;
  ScalarPoly scalar_part() const;
  std::set<Generator> generators() const;

  void add_term(const Word& word, const ScalarPoly& coeff);

  OperatorExpr& operator+=(const OperatorExpr& o);
  OperatorExpr& operator-=(const OperatorExpr& o);
  OperatorExpr& operator*=(const ScalarPoly& c);

  friend OperatorExpr operator+(OperatorExpr a, const OperatorExpr& b) { return a += b; }
  friend OperatorExpr operator-(OperatorExpr a, const OperatorExpr& b) { return a -= b; }
  friend OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);
  friend OperatorExpr operator*(OperatorExpr a, const ScalarPoly& c) { return a *= c; }
  friend OperatorExpr operator*(const ScalarPoly& c, OperatorExpr a) { return a *= c; }
  OperatorExpr operator-() const;
  OperatorExpr pow(int exponent) const;

  // Syntactic equality of the stored terms.
  friend bool operator==(const OperatorExpr& a, const OperatorExpr& b) { return a.terms_ == b.terms_; }

 private:
  friend OperatorExpr canonicalize(const OperatorExpr& e);
  TermMap terms_;
  bool canonical_ = true;
};

// Rewrites every word into generator order using [Q_k, P_l] = i hbar delta_kl
// (and commuting sets). Total and idempotent.
OperatorExpr canonicalize(const OperatorExpr& e);

// Reverse every word and conjugate every coefficient.
OperatorExpr adjoint(const OperatorExpr& e);

bool hermitian_check(const OperatorExpr& e);

// Replace each generator g by g + shift(g); generators missing from the map
// are left alone.
using ShiftMap = std::map<Generator, ScalarPoly>;
OperatorExpr displace(const OperatorExpr& e, const ShiftMap& shifts);

// Shift map sending Q[n] -> q[n], P[n] -> p[n] for generators of the listed
// sets and leaving the rest out.
ShiftMap phase_space_shifts(const std::set<Generator>& generators, const std::set<OperatorSet>& shifted_sets);

// Substitute every generator by a scalar (generators missing from `values`
// map to zero).
ScalarPoly classical_substitution(const OperatorExpr& e, const ShiftMap& values);

void check_degree(const OperatorExpr& e);

std::string to_string(const Word& word);
std::string to_string(const OperatorExpr& e);

}  // namespace eqlab
