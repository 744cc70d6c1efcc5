#include "eqlab/normal_order.hpp"

#include <algorithm>

#include "eqlab/errors.hpp"

namespace eqlab {

namespace {

using Partial = std::map<LadderWord, ScalarPoly>;

void accumulate(Partial& p, const LadderWord& w, const ScalarPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = p.try_emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) p.erase(it);
  }
}

LadderWord with_letter(const LadderWord& w, LadderLetter letter) {
  LadderWord out = w;
  out.insert(std::upper_bound(out.begin(), out.end(), letter), letter);
  return out;
}

// Right-multiplies a normal-ordered partial product by one ladder letter.
// With `contract`, moving b^dag_j left past b_k contributes hbar M_kj.
void multiply_letter(const Partial& partial, LadderLetter letter, const ScalarPoly& weight,
                     const FiducialFrame& frame, bool contract, Partial& next) {
  const ScalarPoly hbar = ScalarPoly::hbar();
  for (const auto& [w, c] : partial) {
    const ScalarPoly base = c * weight;
    accumulate(next, with_letter(w, letter), base);
    if (!contract || !letter.dagger) continue;
    for (std::size_t pos = 0; pos < w.size(); ++pos) {
      if (w[pos].dagger) continue;
      const ScalarPoly& m = frame.gram()[w[pos].index][letter.index];
      if (m.is_zero()) continue;
      LadderWord reduced = w;
      reduced.erase(reduced.begin() + static_cast<long>(pos));
      accumulate(next, reduced, base * hbar * m);
    }
  }
}

NormalOrderedExpr order(const OperatorExpr& e, const std::shared_ptr<const FiducialFrame>& f, bool contract) {
  check_degree(e);
  for (const auto& g : e.generators()) f->expansion(g);  // span check up front
  NormalOrderedExpr out(f);
  for (const auto& [word, coeff] : e.terms()) {
    Partial partial;
    partial.emplace(LadderWord{}, coeff);
    for (const auto& g : word) {
      const auto& ex = f->expansion(g);
      Partial next;
      for (std::size_t i = 0; i < f->size(); ++i) {
        if (!ex.annihilation[i].is_zero()) {
          multiply_letter(partial, {false, static_cast<int>(i)}, ex.annihilation[i], *f, contract, next);
        }
        if (!ex.creation[i].is_zero()) {
          multiply_letter(partial, {true, static_cast<int>(i)}, ex.creation[i], *f, contract, next);
        }
      }
      partial = std::move(next);
    }
    for (const auto& [w, c] : partial) out.add_term(w, c);
  }
  return out;
}

LinearForm letter_form(const FiducialFrame& f, LadderLetter letter) {
  const auto& form = f.annihilators()[letter.index];
  return letter.dagger ? conjugate(form) : form;
}

OperatorExpr expand_words(const NormalOrderedExpr& n, bool commutative) {
  OperatorExpr out;
  for (const auto& [word, coeff] : n.terms()) {
    std::map<Word, ScalarPoly> partial;
    partial.emplace(Word{}, coeff);
    for (const auto& letter : word) {
      const LinearForm form = letter_form(n.frame(), letter);
      std::map<Word, ScalarPoly> next;
      for (const auto& [w, c] : partial) {
        for (const auto& [g, gc] : form) {
          Word nw = w;
          if (commutative) {
            nw.insert(std::upper_bound(nw.begin(), nw.end(), g), g);
          } else {
            nw.push_back(g);
          }
          auto [it, inserted] = next.try_emplace(nw, c * gc);
          if (!inserted) it->second += c * gc;
        }
      }
      partial = std::move(next);
    }
    for (const auto& [w, c] : partial) out.add_term(w, c);
  }
  return out;
}

}  // namespace

ScalarPoly NormalOrderedExpr::scalar_part() const {
  auto it = terms_.find(LadderWord{});
  return it == terms_.end() ? ScalarPoly() : it->second;
}

void NormalOrderedExpr::add_term(const LadderWord& word, const ScalarPoly& coeff) {
  if (coeff.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(word, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

NormalOrderedExpr& NormalOrderedExpr::operator+=(const NormalOrderedExpr& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

NormalOrderedExpr NormalOrderedExpr::without_scalar() const {
  NormalOrderedExpr out = *this;
  out.terms_.erase(LadderWord{});
  return out;
}

NormalOrderedExpr normal_order(const OperatorExpr& e, const std::shared_ptr<const FiducialFrame>& f) {
  return order(e, f, true);
}

NormalOrderedExpr wick(const OperatorExpr& e, const std::shared_ptr<const FiducialFrame>& f) {
  return order(e, f, false);
}

OperatorExpr to_operator(const NormalOrderedExpr& n) { return canonicalize(expand_words(n, false)); }

OperatorExpr symbol(const NormalOrderedExpr& n) { return expand_words(n, true); }

NormalOrderedExpr adjoint(const NormalOrderedExpr& n) {
  NormalOrderedExpr out(n.frame_ptr());
  for (const auto& [word, coeff] : n.terms()) {
    LadderWord w;
    for (const auto& letter : word) w.push_back({!letter.dagger, letter.index});
    std::sort(w.begin(), w.end());
    out.add_term(w, coeff.conj());
  }
  return out;
}

NormalOrderedExpr displace(const NormalOrderedExpr& n, const ShiftMap& shifts) {
  const FiducialFrame& f = n.frame();
  std::vector<ScalarPoly> beta(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (const auto& [g, c] : f.annihilators()[i]) {
      auto it = shifts.find(g);
      if (it != shifts.end()) beta[i] += c * it->second;
    }
  }
  NormalOrderedExpr out(n.frame_ptr());
  for (const auto& [word, coeff] : n.terms()) {
    Partial partial;
    partial.emplace(LadderWord{}, coeff);
    for (const auto& letter : word) {
      const ScalarPoly shift = letter.dagger ? beta[letter.index].conj() : beta[letter.index];
      Partial next;
      for (const auto& [w, c] : partial) {
        LadderWord kept = w;
        kept.push_back(letter);
        accumulate(next, kept, c);
        if (!shift.is_zero()) accumulate(next, w, c * shift);
      }
      partial = std::move(next);
    }
    for (const auto& [w, c] : partial) out.add_term(w, c);
  }
  return out;
}

ScalarPoly fiducial_expectation(const NormalOrderedExpr& n) { return n.scalar_part(); }

ScalarPoly fiducial_expectation(const OperatorExpr& /*e*/) {
  throw Error(ErrorKind::kNotNormalOrdered, "fiducial expectation needs a normal-ordered expression with a frame");
}

ScalarPoly wcp_symbolic(const OperatorExpr& h, const std::shared_ptr<const FiducialFrame>& f,
                        const std::set<OperatorSet>& shifted_sets) {
  if (!hermitian_check(h)) {
    throw Error(ErrorKind::kHermiticity, "weak correspondence needs a Hermitian operator");
  }
  const NormalOrderedExpr ordered = normal_order(h, f);
  std::set<Generator> gens = h.generators();
  gens.insert(f->span().begin(), f->span().end());
  return fiducial_expectation(displace(ordered, phase_space_shifts(gens, shifted_sets)));
}

std::string to_string(const LadderWord& word) {
  std::string out;
  for (const auto& letter : word) {
    if (!out.empty()) out += "*";
    out += letter.dagger ? "bdag[" : "b[";
    out += std::to_string(letter.index) + "]";
  }
  return out;
}

std::string to_string(const NormalOrderedExpr& n) {
  if (n.terms().empty()) return "0";
  std::string out;
  for (auto it = n.terms().rbegin(); it != n.terms().rend(); ++it) {
    const std::string coeff = to_string(it->second);
    const std::string word = to_string(it->first);
    if (!out.empty()) out += " + ";
    if (word.empty()) {
      out += "(" + coeff + ")";
    } else if (coeff == "1") {
      out += word;
    } else {
      out += "(" + coeff + ")*" + word;
    }
  }
  return out;
}

std::string render_generator_form(const NormalOrderedExpr& n) {
  const ScalarPoly scalar = n.scalar_part();
  const NormalOrderedExpr rest = n.without_scalar();
  std::string out;
  if (!rest.terms().empty()) out = ":[" + to_string(symbol(rest)) + "]: @" + n.frame().name();
  if (!scalar.is_zero()) {
    if (!out.empty()) out += " + ";
    out += scalar.size() > 1 ? "(" + to_string(scalar) + ")" : to_string(scalar);
  }
  return out.empty() ? "0" : out;
}

}  // namespace eqlab
