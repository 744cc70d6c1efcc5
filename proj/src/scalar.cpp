#include "eqlab/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eqlab/errors.hpp"

namespace eqlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFrameSpan: return "FrameSpanError";
    case ErrorKind::kHermiticity: return "HermiticityError";
    case ErrorKind::kNotNormalOrdered: return "NotNormalOrderedError";
    case ErrorKind::kDegreeLimit: return "DegreeLimitError";
    case ErrorKind::kNonCommutingFrame: return "NonCommutingFrame";
    case ErrorKind::kGramNotPositiveDefinite: return "GramNotPositiveDefinite";
    case ErrorKind::kDependentFiducialConditions: return "DependentFiducialConditions";
    case ErrorKind::kFrameInversion: return "FrameInversionError";
    case ErrorKind::kNonHermitianHamiltonian: return "NonHermitianHamiltonian";
    case ErrorKind::kInvalidModel: return "InvalidModel";
    case ErrorKind::kUnknownGenerator: return "UnknownGeneratorError";
    case ErrorKind::kUnboundSymbol: return "UnboundSymbol";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kDegenerateGroundSpace: return "DegenerateGroundSpace";
    case ErrorKind::kTruncationLeakage: return "TruncationLeakage";
    case ErrorKind::kStepTooLarge: return "StepTooLarge";
    case ErrorKind::kStepRejected: return "StepRejected";
    case ErrorKind::kGridMismatch: return "GridMismatch";
    case ErrorKind::kZetaOutOfRange: return "ZetaOutOfRange";
    case ErrorKind::kDivisionByZero: return "DivisionByZero";
  }
  return "Error";
}

std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t pos = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  auto digits = [&](std::size_t from, std::size_t to) {
    if (from >= to) return false;
    for (std::size_t k = from; k < to; ++k) {
      if (text[k] < '0' || text[k] > '9') return false;
    }
    return true;
  };
  const auto slash = text.find('/', pos);
  const std::size_t num_end = slash == std::string::npos ? text.size() : slash;
  if (!digits(pos, num_end)) return std::nullopt;
  mpz_class num(text.substr(pos, num_end - pos), 10);
  mpz_class den(1);
  if (slash != std::string::npos) {
    if (!digits(slash + 1, text.size())) return std::nullopt;
    den = mpz_class(text.substr(slash + 1), 10);
    if (den == 0) return std::nullopt;
  }
  Rational value(num, den);
  value.canonicalize();
  if (negative) value = -value;
  return value;
}

std::string to_string(const Rational& value) { return value.get_str(10); }

ComplexRational& ComplexRational::operator+=(const ComplexRational& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

ComplexRational& ComplexRational::operator-=(const ComplexRational& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

ComplexRational& ComplexRational::operator*=(const ComplexRational& o) {
  if (sgn(im_) == 0 && sgn(o.im_) == 0) {
    re_ *= o.re_;
    return *this;
  }
  Rational re = re_ * o.re_ - im_ * o.im_;
  Rational im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

ComplexRational& ComplexRational::operator/=(const ComplexRational& o) {
  if (o.is_zero()) throw Error(ErrorKind::kDivisionByZero, "division by zero");
  const Rational norm = o.re_ * o.re_ + o.im_ * o.im_;
  *this *= o.conj();
  re_ /= norm;
  im_ /= norm;
  return *this;
}

std::string to_string(const ComplexRational& value) {
  if (value.is_real()) return to_string(value.real());
  if (sgn(value.real()) == 0) {
    if (value.imag() == 1) return "i";
    if (value.imag() == -1) return "-i";
    return to_string(value.imag()) + "*i";
  }
  std::string out = "(" + to_string(value.real());
  out += sgn(value.imag()) < 0 ? "-" : "+";
  const Rational mag = abs(value.imag());
  out += mag == 1 ? "i" : to_string(mag) + "*i";
  return out + ")";
}

std::string to_string(const Atom& atom) {
  if (atom.kind == AtomKind::kShift) return atom.name + "[" + std::to_string(atom.index) + "]";
  return atom.name;
}

Monomial::Monomial(const Atom& atom, int exponent) {
  if (exponent != 0) factors_.emplace_back(atom, exponent);
}

int Monomial::exponent_of(const Atom& atom) const {
  for (const auto& [a, e] : factors_) {
    if (a == atom) return e;
  }
  return 0;
}

int Monomial::total_degree() const {
  int d = 0;
  for (const auto& f : factors_) d += f.second;
  return d;
}

Monomial Monomial::inverse() const {
  Monomial out = *this;
  for (auto& f : out.factors_) f.second = -f.second;
  return out;
}

Monomial Monomial::without(const Atom& atom) const {
  Monomial out;
  for (const auto& f : factors_) {
    if (!(f.first == atom)) out.factors_.push_back(f);
  }
  return out;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial out;
  auto ia = a.factors_.begin();
  auto ib = b.factors_.begin();
  while (ia != a.factors_.end() || ib != b.factors_.end()) {
    if (ib == b.factors_.end() || (ia != a.factors_.end() && ia->first < ib->first)) {
      out.factors_.push_back(*ia++);
    } else if (ia == a.factors_.end() || ib->first < ia->first) {
      out.factors_.push_back(*ib++);
    } else {
      const int e = ia->second + ib->second;
      if (e != 0) out.factors_.emplace_back(ia->first, e);
      ++ia;
      ++ib;
    }
  }
  return out;
}

ScalarPoly::ScalarPoly(ComplexRational c) {
  if (!c.is_zero()) terms_.emplace(Monomial(), std::move(c));
}

ScalarPoly::ScalarPoly(const Monomial& m, ComplexRational c) {
  if (!c.is_zero()) terms_.emplace(m, std::move(c));
}

bool ScalarPoly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
}

ComplexRational ScalarPoly::constant() const {
  auto it = terms_.find(Monomial());
  return it == terms_.end() ? ComplexRational() : it->second;
}

void ScalarPoly::add_term(const Monomial& m, const ComplexRational& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

ScalarPoly& ScalarPoly::operator+=(const ScalarPoly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

ScalarPoly& ScalarPoly::operator-=(const ScalarPoly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

ScalarPoly& ScalarPoly::operator*=(const ScalarPoly& o) {
  *this = *this * o;
  return *this;
}

ScalarPoly& ScalarPoly::operator*=(const ComplexRational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second *= c;
  return *this;
}

ScalarPoly operator*(const ScalarPoly& a, const ScalarPoly& b) {
  ScalarPoly out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
  }
  return out;
}

ScalarPoly ScalarPoly::operator-() const {
  ScalarPoly out = *this;
  for (auto& t : out.terms_) t.second = -t.second;
  return out;
}

ScalarPoly ScalarPoly::conj() const {
  ScalarPoly out = *this;
  for (auto& t : out.terms_) t.second = t.second.conj();
  return out;
}

std::optional<ScalarPoly> ScalarPoly::inverse() const {
  if (terms_.size() != 1) return std::nullopt;
  const auto& [m, c] = *terms_.begin();
  return ScalarPoly(m.inverse(), ComplexRational(1) / c);
}

ScalarPoly ScalarPoly::pow(int exponent) const {
  if (exponent < 0) {
    auto inv = inverse();
    if (!inv) throw Error(ErrorKind::kDivisionByZero, "negative power of a multi-term polynomial");
    return inv->pow(-exponent);
  }
  ScalarPoly result(1);
  ScalarPoly base = *this;
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

ScalarPoly ScalarPoly::derivative(const Atom& atom) const {
  ScalarPoly out;
  for (const auto& [m, c] : terms_) {
    const int e = m.exponent_of(atom);
    if (e == 0) continue;
    out.add_term(m * Monomial(atom, -1), c * ComplexRational(e));
  }
  return out;
}

ScalarPoly ScalarPoly::substitute(const Atom& atom, const ScalarPoly& value) const {
  ScalarPoly out;
  for (const auto& [m, c] : terms_) {
    const int e = m.exponent_of(atom);
    if (e == 0) {
      out.add_term(m, c);
      continue;
    }
    out += ScalarPoly(m.without(atom), c) * value.pow(e);
  }
  return out;
}

ScalarPoly ScalarPoly::filter(const std::function<bool(const Monomial&)>& keep) const {
  ScalarPoly out;
  for (const auto& [m, c] : terms_) {
    if (keep(m)) out.terms_.emplace(m, c);
  }
  return out;
}

bool ScalarPoly::contains(const Atom& atom) const {
  for (const auto& t : terms_) {
    if (t.first.exponent_of(atom) != 0) return true;
  }
  return false;
}

std::vector<Atom> ScalarPoly::atoms() const {
  std::vector<Atom> out;
  for (const auto& t : terms_) {
    for (const auto& f : t.first.factors()) out.push_back(f.first);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::complex<double> ScalarPoly::evaluate(const Binding& binding) const {
  std::complex<double> total = 0.0;
  for (const auto& [m, c] : terms_) {
    double value = 1.0;
    for (const auto& [a, e] : m.factors()) {
      auto it = binding.find(a);
      if (it == binding.end()) {
        throw Error(ErrorKind::kUnboundSymbol, "no numeric value bound for '" + to_string(a) + "'");
      }
      value *= std::pow(it->second, e);
    }
    total += c.to_complex() * value;
  }
  return total;
}

namespace {

std::string render_monomial(const Monomial& m) {
  std::string out;
  for (const auto& [a, e] : m.factors()) {
    if (e < 0) continue;
    if (!out.empty()) out += "*";
    out += to_string(a);
    if (e != 1) out += "^" + std::to_string(e);
  }
  for (const auto& [a, e] : m.factors()) {
    if (e > 0) continue;
    out += out.empty() ? "1/" : "/";
    out += to_string(a);
    if (e != -1) out += "^" + std::to_string(-e);
  }
  return out;
}

}  // namespace

std::string to_string(const ScalarPoly& poly) {
  if (poly.is_zero()) return "0";
  std::vector<std::pair<const Monomial*, const ComplexRational*>> order;
  for (const auto& [m, c] : poly.terms()) order.emplace_back(&m, &c);
  std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
    return x.first->total_degree() > y.first->total_degree();
  });
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : order) {
    ComplexRational coeff = *c;
    bool negative = coeff.is_real() && sgn(coeff.real()) < 0;
    if (sgn(coeff.real()) == 0 && sgn(coeff.imag()) < 0) negative = true;
    if (negative) coeff = -coeff;
    if (first) {
      if (negative) os << "-";
    } else {
      os << (negative ? " - " : " + ");
    }
    first = false;
    const std::string mono = render_monomial(*m);
    if (mono.empty()) {
      os << to_string(coeff);
    } else if (coeff == ComplexRational(1)) {
      os << mono;
    } else if (mono.rfind("1/", 0) == 0) {
      os << to_string(coeff) << mono.substr(1);
    } else {
      os << to_string(coeff) << "*" << mono;
    }
  }
  return os.str();
}

}  // namespace eqlab
