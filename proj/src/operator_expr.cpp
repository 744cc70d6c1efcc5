#include "eqlab/operator_expr.hpp"

#include <algorithm>
#include <sstream>

#include "eqlab/errors.hpp"

namespace eqlab {

const char* set_name(OperatorSet set) { return set == OperatorSet::kPQ ? "pq" : "rs"; }

std::optional<OperatorSet> parse_set_name(const std::string& name) {
  if (name == "pq") return OperatorSet::kPQ;
  if (name == "rs") return OperatorSet::kRS;
  return std::nullopt;
}

char generator_letter(OperatorSet set, GeneratorKind kind) {
  if (set == OperatorSet::kPQ) return kind == GeneratorKind::kPosition ? 'Q' : 'P';
  return kind == GeneratorKind::kPosition ? 'S' : 'R';
}

Atom shift_atom(OperatorSet set, GeneratorKind kind, int mode) {
  const char letter = static_cast<char>(generator_letter(set, kind) - 'A' + 'a');
  return Atom::shift(std::string(1, letter), mode);
}

std::string to_string(const Generator& g) {
  return std::string(1, generator_letter(g.set, g.kind)) + "[" + std::to_string(g.mode) + "]";
}

int commutator_sign(const Generator& a, const Generator& b) {
  if (!a.same_mode(b) || a.kind == b.kind) return 0;
  return a.kind == GeneratorKind::kPosition ? 1 : -1;
}

OperatorExpr::OperatorExpr(ScalarPoly scalar) {
  if (!scalar.is_zero()) terms_.emplace(Word{}, std::move(scalar));
}

OperatorExpr::OperatorExpr(const Generator& g) { terms_.emplace(Word{g}, ScalarPoly(1)); }

OperatorExpr::OperatorExpr(Word word, ScalarPoly coeff) {
  canonical_ = std::is_sorted(word.begin(), word.end());
  if (!coeff.is_zero()) terms_.emplace(std::move(word), std::move(coeff));
}

int OperatorExpr::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, static_cast<int>(t.first.size()));
  return d;
}

ScalarPoly OperatorExpr::scalar_part() const {
  auto it = terms_.find(Word{});
  return it == terms_.end() ? ScalarPoly() : it->second;
}

std::set<Generator> OperatorExpr::generators() const {
  std::set<Generator> out;
  for (const auto& t : terms_) out.insert(t.first.begin(), t.first.end());
  return out;
}

void OperatorExpr::add_term(const Word& word, const ScalarPoly& coeff) {
  if (coeff.is_zero()) return;
  if (!std::is_sorted(word.begin(), word.end())) canonical_ = false;
  auto [it, inserted] = terms_.try_emplace(word, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

OperatorExpr& OperatorExpr::operator+=(const OperatorExpr& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

OperatorExpr& OperatorExpr::operator-=(const OperatorExpr& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, -c);
  return *this;
}

OperatorExpr& OperatorExpr::operator*=(const ScalarPoly& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.second = t.second * c;
  return *this;
}

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b) {
  OperatorExpr out;
  for (const auto& [wa, ca] : a.terms_) {
    for (const auto& [wb, cb] : b.terms_) {
      if (static_cast<int>(wa.size() + wb.size()) > kMaxDegree) {
        throw Error(ErrorKind::kDegreeLimit,
                    "operator product exceeds the degree limit of " + std::to_string(kMaxDegree));
      }
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out.add_term(w, ca * cb);
    }
  }
  return out;
}

OperatorExpr OperatorExpr::operator-() const {
  OperatorExpr out = *this;
  for (auto& t : out.terms_) t.second = -t.second;
  return out;
}

OperatorExpr OperatorExpr::pow(int exponent) const {
  OperatorExpr result(ScalarPoly(1));
  for (int k = 0; k < exponent; ++k) result = result * *this;
  return result;
}

void check_degree(const OperatorExpr& e) {
  if (e.degree() > kMaxDegree) {
    throw Error(ErrorKind::kDegreeLimit,
                "expression of degree " + std::to_string(e.degree()) + " exceeds the limit of " +
                    std::to_string(kMaxDegree));
  }
}

namespace {

// Ordered polynomial sum c_{a,b} X^a K^b for a single canonical pair.
using PairPoly = std::map<std::pair<int, int>, ScalarPoly>;

void accumulate(PairPoly& poly, std::pair<int, int> key, const ScalarPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = poly.try_emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) poly.erase(it);
  }
}

// Right-multiplies by X or K using K^b X = X K^b - i hbar b K^(b-1).
PairPoly order_single_mode(const std::vector<GeneratorKind>& letters) {
  PairPoly poly;
  poly.emplace(std::make_pair(0, 0), ScalarPoly(1));
  const ScalarPoly minus_i_hbar = ScalarPoly(ComplexRational(0, -1)) * ScalarPoly::hbar();
  for (const auto kind : letters) {
    PairPoly next;
    for (const auto& [key, c] : poly) {
      const auto [a, b] = key;
      if (kind == GeneratorKind::kMomentum) {
        accumulate(next, {a, b + 1}, c);
      } else {
        accumulate(next, {a + 1, b}, c);
        if (b > 0) accumulate(next, {a, b - 1}, c * minus_i_hbar * ScalarPoly(b));
      }
    }
    poly = std::move(next);
  }
  return poly;
}

}  // namespace

OperatorExpr canonicalize(const OperatorExpr& e) {
  OperatorExpr out;
  for (const auto& [word, coeff] : e.terms_) {
    if (std::is_sorted(word.begin(), word.end())) {
      out.add_term(word, coeff);
      continue;
    }
    // Distinct modes commute, so a stable sort by mode is exact.
    Word grouped = word;
    std::stable_sort(grouped.begin(), grouped.end(),
                     [](const Generator& x, const Generator& y) {
                       return std::tie(x.set, x.mode) < std::tie(y.set, y.mode);
                     });
    std::map<Word, ScalarPoly> partial;
    partial.emplace(Word{}, coeff);
    std::size_t start = 0;
    while (start < grouped.size()) {
      std::size_t stop = start;
      std::vector<GeneratorKind> letters;
      while (stop < grouped.size() && grouped[stop].same_mode(grouped[start])) {
        letters.push_back(grouped[stop].kind);
        ++stop;
      }
      const Generator pos{grouped[start].set, grouped[start].mode, GeneratorKind::kPosition};
      const Generator mom{grouped[start].set, grouped[start].mode, GeneratorKind::kMomentum};
      const PairPoly ordered = order_single_mode(letters);
      std::map<Word, ScalarPoly> next;
      for (const auto& [w, c] : partial) {
        for (const auto& [key, pc] : ordered) {
          Word nw = w;
          nw.insert(nw.end(), key.first, pos);
          nw.insert(nw.end(), key.second, mom);
          auto [it, inserted] = next.try_emplace(nw, c * pc);
          if (!inserted) it->second += c * pc;
        }
      }
      partial = std::move(next);
      start = stop;
    }
    for (const auto& [w, c] : partial) out.add_term(w, c);
  }
  out.canonical_ = true;
  return out;
}

OperatorExpr adjoint(const OperatorExpr& e) {
  OperatorExpr out;
  for (const auto& [word, coeff] : e.terms()) {
    Word reversed(word.rbegin(), word.rend());
    out.add_term(reversed, coeff.conj());
  }
  return out;
}

bool hermitian_check(const OperatorExpr& e) { return canonicalize(e - adjoint(e)).is_zero(); }

OperatorExpr displace(const OperatorExpr& e, const ShiftMap& shifts) {
  OperatorExpr out;
  for (const auto& [word, coeff] : e.terms()) {
    std::map<Word, ScalarPoly> partial;
    partial.emplace(Word{}, coeff);
    for (const auto& g : word) {
      auto shift = shifts.find(g);
      std::map<Word, ScalarPoly> next;
      for (const auto& [w, c] : partial) {
        Word nw = w;
        nw.push_back(g);
        auto [it, inserted] = next.try_emplace(nw, c);
        if (!inserted) it->second += c;
        if (shift != shifts.end() && !shift->second.is_zero()) {
          auto [jt, fresh] = next.try_emplace(w, c * shift->second);
          if (!fresh) jt->second += c * shift->second;
        }
      }
      partial = std::move(next);
    }
    for (const auto& [w, c] : partial) out.add_term(w, c);
  }
  return out;
}

ShiftMap phase_space_shifts(const std::set<Generator>& generators, const std::set<OperatorSet>& shifted_sets) {
  ShiftMap shifts;
  for (const auto& g : generators) {
    if (shifted_sets.count(g.set)) shifts.emplace(g, ScalarPoly::atom(g.shift()));
  }
  return shifts;
}

ScalarPoly classical_substitution(const OperatorExpr& e, const ShiftMap& values) {
  ScalarPoly out;
  for (const auto& [word, coeff] : e.terms()) {
    ScalarPoly term = coeff;
    for (const auto& g : word) {
      auto it = values.find(g);
      if (it == values.end()) {
        term = ScalarPoly();
        break;
      }
      term *= it->second;
    }
    out += term;
  }
  return out;
}

std::string to_string(const Word& word) {
  std::string out;
  std::size_t k = 0;
  while (k < word.size()) {
    std::size_t run = k;
    while (run < word.size() && word[run] == word[k]) ++run;
    if (!out.empty()) out += "*";
    out += to_string(word[k]);
    if (run - k > 1) out += "^" + std::to_string(run - k);
    k = run;
  }
  return out;
}

namespace {

bool is_negative_single(const ScalarPoly& c) {
  if (c.size() != 1) return false;
  const auto& coeff = c.terms().begin()->second;
  if (coeff.is_real()) return sgn(coeff.real()) < 0;
  return sgn(coeff.real()) == 0 && sgn(coeff.imag()) < 0;
}

}  // namespace

std::string to_string(const OperatorExpr& e) {
  if (e.is_zero()) return "0";
  std::vector<std::pair<const Word*, const ScalarPoly*>> order;
  for (const auto& [w, c] : e.terms()) order.emplace_back(&w, &c);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& x, const auto& y) { return x.first->size() > y.first->size(); });
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : order) {
    ScalarPoly coeff = *c;
    const bool negative = is_negative_single(coeff);
    if (negative) coeff = -coeff;
    if (first) {
      if (negative) os << "-";
    } else {
      os << (negative ? " - " : " + ");
    }
    first = false;
    const std::string word = to_string(*w);
    const std::string scalar = to_string(coeff);
    if (word.empty()) {
      os << (coeff.size() > 1 ? "(" + scalar + ")" : scalar);
    } else if (coeff == ScalarPoly(1)) {
      os << word;
    } else if (coeff.size() > 1) {
      os << "(" << scalar << ")*" << word;
    } else {
      os << scalar << "*" << word;
    }
  }
  return os.str();
}

}  // namespace eqlab
