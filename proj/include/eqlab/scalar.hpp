#pragma once

#include <gmpxx.h>

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eqlab {

using Rational = mpq_class;

// Parses "a", "-a" or "a/b" into a canonical rational. Returns nullopt on
// malformed input or a zero denominator.
std::optional<Rational> parse_rational(const std::string& text);
std::string to_string(const Rational& value);

/// Exact complex number with rational real and imaginary parts.
class ComplexRational {
 public:
  ComplexRational() = default;
  ComplexRational(Rational re) : re_(std::move(re)) {}  // NOLINT
  ComplexRational(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}
  ComplexRational(long value) : re_(value) {}  // NOLINT
  ComplexRational(int value) : re_(value) {}   // NOLINT

  static ComplexRational i() { return {Rational(0), Rational(1)}; }

  const Rational& real() const { return re_; }
  const Rational& imag() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  bool is_real() const { return sgn(im_) == 0; }
  ComplexRational conj() const { return {re_, -im_}; }
  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  ComplexRational& operator+=(const ComplexRational& o);
  ComplexRational& operator-=(const ComplexRational& o);
  ComplexRational& operator*=(const ComplexRational& o);
  ComplexRational& operator/=(const ComplexRational& o);

  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
  friend ComplexRational operator*(ComplexRational a, const ComplexRational& b) { return a *= b; }
  friend ComplexRational operator/(ComplexRational a, const ComplexRational& b) { return a /= b; }
  ComplexRational operator-() const { return {-re_, -im_}; }

  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

 private:
  Rational re_{0};
  Rational im_{0};
};

std::string to_string(const ComplexRational& value);

enum class AtomKind : std::uint8_t { kHbar, kParameter, kShift };

// A commuting real symbol: hbar, a named model parameter, or a phase-space
// shift symbol such as q[0]. All atoms are treated as positive reals when a
// sign decision is needed.
struct Atom {
  AtomKind kind = AtomKind::kParameter;
  std::string name;
  int index = -1;

  static Atom hbar() { return {AtomKind::kHbar, "hbar", -1}; }
  static Atom parameter(std::string name) { return {AtomKind::kParameter, std::move(name), -1}; }
  static Atom shift(std::string name, int index) { return {AtomKind::kShift, std::move(name), index}; }

  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;
};

std::string to_string(const Atom& atom);

/// Laurent monomial: sorted (atom, nonzero exponent) pairs.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(const Atom& atom, int exponent = 1);

  const std::vector<std::pair<Atom, int>>& factors() const { return factors_; }
  bool is_one() const { return factors_.empty(); }
  int exponent_of(const Atom& atom) const;
  int total_degree() const;
  Monomial inverse() const;
  Monomial without(const Atom& atom) const;

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;

 private:
  std::vector<std::pair<Atom, int>> factors_;
};

using Binding = std::map<Atom, double>;

/// Exact polynomial (Laurent in its atoms) with complex-rational
/// coefficients. Zero terms are never stored, so equality is syntactic.
class ScalarPoly {
 public:
  using TermMap = std::map<Monomial, ComplexRational>;

  ScalarPoly() = default;
  ScalarPoly(ComplexRational c);  // NOLINT
  ScalarPoly(Rational c) : ScalarPoly(ComplexRational(std::move(c))) {}  // NOLINT
  ScalarPoly(long c) : ScalarPoly(ComplexRational(c)) {}                  // NOLINT
  ScalarPoly(int c) : ScalarPoly(ComplexRational(c)) {}                   // NOLINT
  ScalarPoly(const Monomial& m, ComplexRational c = ComplexRational(1));

  static ScalarPoly atom(const Atom& a) { return ScalarPoly(Monomial(a)); }
  static ScalarPoly hbar() { return atom(Atom::hbar()); }
  static ScalarPoly i() { return ScalarPoly(ComplexRational::i()); }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  // Coefficient of the empty monomial.
  ComplexRational constant() const;
  std::size_t size() const { return terms_.size(); }

  ScalarPoly conj() const;
  // Exact inverse; only single-term polynomials are invertible.
  std::optional<ScalarPoly> inverse() const;
  ScalarPoly pow(int exponent) const;
  ScalarPoly derivative(const Atom& atom) const;
  ScalarPoly substitute(const Atom& atom, const ScalarPoly& value) const;
  ScalarPoly filter(const std::function<bool(const Monomial&)>& keep) const;
  bool contains(const Atom& atom) const;
  std::vector<Atom> atoms() const;

  // Throws Error(kUnboundSymbol) when an atom is missing from the binding.
  std::complex<double> evaluate(const Binding& binding) const;

  void add_term(const Monomial& m, const ComplexRational& c);

  ScalarPoly& operator+=(const ScalarPoly& o);
  ScalarPoly& operator-=(const ScalarPoly& o);
  ScalarPoly& operator*=(const ScalarPoly& o);
  ScalarPoly& operator*=(const ComplexRational& c);

  friend ScalarPoly operator+(ScalarPoly a, const ScalarPoly& b) { return a += b; }
  friend ScalarPoly operator-(ScalarPoly a, const ScalarPoly& b) { return a -= b; }
  friend ScalarPoly operator*(const ScalarPoly& a, const ScalarPoly& b);
  ScalarPoly operator-() const;

  friend bool operator==(const ScalarPoly& a, const ScalarPoly& b) { return a.terms_ == b.terms_; }

 private:
  TermMap terms_;
};

std::string to_string(const ScalarPoly& poly);

}  // namespace eqlab
