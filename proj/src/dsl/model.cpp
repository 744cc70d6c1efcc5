#include "eqlab/dsl/model.hpp"

#include <algorithm>

#include "eqlab/errors.hpp"

namespace eqlab::dsl {

std::vector<std::pair<OperatorSet, int>> CheckedModel::shifted_modes() const {
  std::vector<std::pair<OperatorSet, int>> out;
  for (const auto& m : modes) {
    if (shifted.count(m.first)) out.push_back(m);
  }
  return out;
}

namespace {

using FrameMap = std::map<std::string, std::shared_ptr<const FiducialFrame>>;

OperatorExpr lower_node(const Ast& n, const ModelSpec& spec, const FrameMap& frames) {
  switch (n.kind) {
    case NodeKind::kNumber:
      return OperatorExpr(ScalarPoly(n.number));
    case NodeKind::kImaginary:
      return OperatorExpr(ScalarPoly::i());
    case NodeKind::kHbar:
      return OperatorExpr(ScalarPoly::hbar());
    case NodeKind::kParameter: {
      const ParameterDecl* p = spec.parameter(n.name);
      if (!p) throw Error(ErrorKind::kInvalidModel, "unknown parameter '" + n.name + "'");
      if (n.name == "hbar") return OperatorExpr(ScalarPoly::hbar());
      if (p->value) return OperatorExpr(ScalarPoly(*p->value));
      return OperatorExpr(ScalarPoly::atom(Atom::parameter(n.name)));
    }
    case NodeKind::kGenerator:
      return OperatorExpr(n.generator);
    case NodeKind::kAdd:
      return lower_node(n.children[0], spec, frames) + lower_node(n.children[1], spec, frames);
    case NodeKind::kSub:
      return lower_node(n.children[0], spec, frames) - lower_node(n.children[1], spec, frames);
    case NodeKind::kMul:
      return lower_node(n.children[0], spec, frames) * lower_node(n.children[1], spec, frames);
    case NodeKind::kNeg:
      return -lower_node(n.children[0], spec, frames);
    case NodeKind::kDiv: {
      const OperatorExpr num = lower_node(n.children[0], spec, frames);
      const OperatorExpr den = canonicalize(lower_node(n.children[1], spec, frames));
      if (den.degree() > 0) throw Error(ErrorKind::kInvalidModel, "division by an operator is not allowed");
      const auto inv = den.scalar_part().inverse();
      if (!inv) {
        throw Error(ErrorKind::kInvalidModel,
                    den.is_zero() ? "division by zero" : "division by a multi-term scalar is not allowed");
      }
      return num * *inv;
    }
    case NodeKind::kPow: {
      const OperatorExpr base = lower_node(n.children[0], spec, frames);
      OperatorExpr out(ScalarPoly(1));
      for (int k = 0; k < n.exponent; ++k) out = out * base;
      return out;
    }
    case NodeKind::kRegion: {
      auto it = frames.find(n.name);
      if (it == frames.end()) throw Error(ErrorKind::kInvalidModel, "unknown frame '" + n.name + "'");
      return to_operator(wick(lower_node(n.children[0], spec, frames), it->second));
    }
  }
  return {};
}

std::shared_ptr<const FiducialFrame> build_frame(const std::string& name, const std::vector<Ast>& conditions,
                                                 const ModelSpec& spec) {
  std::vector<LinearForm> forms;
  for (const auto& c : conditions) {
    const OperatorExpr e = canonicalize(lower_node(c, spec, {}));
    auto form = as_linear_form(e);
    if (!form || form->empty()) {
      throw Error(ErrorKind::kInvalidModel, "frame '" + name + "': condition '" + render_expr(c) +
                                                "' is not a linear combination of generators");
    }
    forms.push_back(std::move(*form));
  }
  return std::make_shared<const FiducialFrame>(name, std::move(forms));
}

// omega*Q[n] + i*P[n] (and omega*S[n] + i*R[n]) for every declared mode, with
// omega taken from the parameter `omega`, else `m`, else 1.
std::vector<Ast> default_vacuum_conditions(const ModelSpec& spec) {
  std::vector<Ast> out;
  const char* scale_name = spec.parameter("omega") ? "omega" : (spec.parameter("m") ? "m" : nullptr);
  for (const auto& s : spec.sets) {
    for (int n = 0; n < s.modes; ++n) {
      Ast scale;
      if (scale_name) {
        scale.kind = NodeKind::kParameter;
        scale.name = scale_name;
      } else {
        scale.kind = NodeKind::kNumber;
        scale.number = 1;
      }
      Ast pos;
      pos.kind = NodeKind::kGenerator;
      pos.generator = Generator{s.set, static_cast<std::uint16_t>(n), GeneratorKind::kPosition};
      Ast mom = pos;
      mom.generator.kind = GeneratorKind::kMomentum;
      Ast i;
      i.kind = NodeKind::kImaginary;
      Ast left;
      left.kind = NodeKind::kMul;
      left.children = {scale, pos};
      Ast right;
      right.kind = NodeKind::kMul;
      right.children = {i, mom};
      Ast sum;
      sum.kind = NodeKind::kAdd;
      sum.children = {left, right};
      out.push_back(sum);
    }
  }
  return out;
}

}  // namespace

OperatorExpr lower(const Ast& node, const ModelSpec& spec, const FrameMap& frames) {
  return lower_node(node, spec, frames);
}

CheckedModel validate(const ModelSpec& spec) {
  CheckedModel model;
  model.spec = spec;

  for (const auto& s : spec.sets) {
    for (int n = 0; n < s.modes; ++n) model.modes.emplace_back(s.set, n);
  }
  std::sort(model.modes.begin(), model.modes.end());
  model.shifted.insert(spec.shifted.begin(), spec.shifted.end());

  for (const auto& f : spec.frames) model.frames.emplace(f.name, build_frame(f.name, f.conditions, spec));
  if (spec.fiducial.empty()) {
    model.fiducial = build_frame("vacuum", default_vacuum_conditions(spec), spec);
    model.frames.emplace("vacuum", model.fiducial);
  } else {
    model.fiducial = model.frames.at(spec.fiducial);
  }
  if (static_cast<int>(model.fiducial->size()) != model.total_modes()) {
    throw Error(ErrorKind::kDependentFiducialConditions,
                "fiducial frame '" + model.fiducial->name() + "' has " + std::to_string(model.fiducial->size()) +
                    " conditions for " + std::to_string(model.total_modes()) + " modes");
  }

  model.hamiltonian = canonicalize(lower_node(spec.hamiltonian, spec, model.frames));
  check_degree(model.hamiltonian);
  for (const auto& g : model.hamiltonian.generators()) {
    if (!model.fiducial->spans(g)) {
      throw Error(ErrorKind::kFrameSpan, "generator " + to_string(g) + " is not covered by the fiducial frame");
    }
  }
  if (!hermitian_check(model.hamiltonian)) {
    throw Error(ErrorKind::kNonHermitianHamiltonian, "the Hamiltonian is not Hermitian");
  }

  model.truncation = spec.truncation.value_or(kDefaultTruncation);
  if (model.truncation < kMinTruncation) {
    throw Error(ErrorKind::kInvalidModel, "truncation must be at least " + std::to_string(kMinTruncation));
  }

  for (const auto& p : spec.parameters) {
    if (!p.value) continue;
    const Atom atom = p.name == "hbar" ? Atom::hbar() : Atom::parameter(p.name);
    model.binding[atom] = p.value->get_d();
  }
  for (const char* name : {"omega", "m"}) {
    const ParameterDecl* p = spec.parameter(name);
    if (p && p->value && sgn(*p->value) > 0) {
      model.omega_rep = p->value->get_d();
      break;
    }
  }
  return model;
}

void override_parameter(ModelSpec& spec, const std::string& name, const Rational& value) {
  for (auto& p : spec.parameters) {
    if (p.name == name) {
      p.value = value;
      return;
    }
  }
  spec.parameters.push_back({name, value});
}

}  // namespace eqlab::dsl
