#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqlab/correspondence.hpp"
#include "eqlab/dsl/model.hpp"
#include "eqlab/scalar.hpp"

namespace eqlab::rotsym {

/// Reducible rotationally symmetric model: N modes in each of the pq and rs
/// sets, mass m, coupling zeta in (0,1), quartic strength v >= 0.
struct RotsymParams {
  int n = 1;
  Rational m{1};
  Rational zeta{1, 2};
  Rational v{1};

  Rational m0sq() const;     // m^2 (1 + zeta^2)
  Rational lambda0() const;  // v zeta^4 m^4
};

// 1/2 sum (p_n^2 + m0sq q_n^2) + lambda0 (sum q_n^2)^2 over n = 0..N-1.
ScalarPoly build_classical(int n, const ScalarPoly& m0sq, const ScalarPoly& lambda0);
ScalarPoly build_classical(int n, const Rational& m0sq, const Rational& lambda0);

// Model source in the zeta frame with only the pq set shifted.
std::string reducible_source(const RotsymParams& params, int truncation = 24);
dsl::ModelSpec build_reducible_spec(const RotsymParams& params, int truncation = 24);
// Throws kZetaOutOfRange for zeta <= 0, kInvalidModel for N < 1, m <= 0 or
// v < 0; zeta >= 1 surfaces as kGramNotPositiveDefinite from validation.
dsl::CheckedModel build_reducible_model(const RotsymParams& params, int truncation = 24);

// (m^2 (1 + zeta^2), v zeta^4 m^4). Throws kZetaOutOfRange unless 0 < zeta < 1.
std::pair<Rational, Rational> effective_parameters(const Rational& m, const Rational& zeta, const Rational& v);

struct Inverted {
  Rational msq;
  Rational v;
  double m = 0;
  std::optional<Rational> m_exact;  // when msq is a rational square
};

// Inverse of effective_parameters. Throws kZetaOutOfRange, kInvalidModel.
Inverted invert_parameters(const Rational& m0sq, const Rational& lambda0, const Rational& zeta);

struct NumericCheck {
  bool enabled = true;
  int truncation = 24;
  int per_axis = 3;
  double range = 1.0;
};

struct MatchReport {
  RotsymParams params;
  bool exact_match = false;
  std::string classical_rendered;
  std::string wcp_rendered;
  std::vector<correspondence::WcpPoint> numeric_points;
  double max_abs_dev = 0;
  int truncation = 0;

  nlohmann::ordered_json to_json() const;
};

// Exact comparison of wcp_symbolic against build_classical at the effective
// parameters, plus numeric samples when enabled (the space has D^(2N) states).
MatchReport verify_match(const RotsymParams& params, const NumericCheck& numeric = {});

// wcp of the irreducible construction 1/2 :sum(P^2 + m0^2 Q^2): + w :(sum(P^2 + m0^2 Q^2))^2:
// in the vacuum frame of m0; m0 and w stay symbolic.
ScalarPoly irreducible_wcp(int n);
// True when some hbar-free term of total shift degree 4 contains a momentum.
bool quartic_depends_on_momentum(const ScalarPoly& h);

}  // namespace eqlab::rotsym
