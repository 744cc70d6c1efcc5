#include "eqlab/dsl/ast.hpp"

#include <sstream>

namespace eqlab::dsl {

std::string render(const ParseDiagnostic& d, const std::string& file) {
  std::ostringstream os;
  os << file << ":" << d.span.line << ":" << d.span.column << ": "
     << (d.severity == Severity::kError ? "error" : "warning") << ": " << d.message;
  if (!d.hint.empty() && d.message.rfind("expected ", 0) != 0) os << " (expected " << d.hint << ")";
  return os.str();
}

bool operator==(const Ast& a, const Ast& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case NodeKind::kNumber:
      if (a.number != b.number) return false;
      break;
    case NodeKind::kParameter:
      if (a.name != b.name) return false;
      break;
    case NodeKind::kGenerator:
      if (!(a.generator == b.generator)) return false;
      break;
    case NodeKind::kPow:
      if (a.exponent != b.exponent) return false;
      break;
    case NodeKind::kRegion:
      if (a.name != b.name) return false;
      break;
    default:
      break;
  }
  for (std::size_t k = 0; k < a.children.size(); ++k) {
    if (!(a.children[k] == b.children[k])) return false;
  }
  return true;
}

namespace {

// Binding strength: sums 1, products 2, unary minus 3, powers 4, atoms 5.
int precedence(const Ast& node) {
  switch (node.kind) {
    case NodeKind::kAdd:
    case NodeKind::kSub:
      return 1;
    case NodeKind::kMul:
    case NodeKind::kDiv:
      return 2;
    case NodeKind::kNeg:
      return 3;
    case NodeKind::kPow:
      return 4;
    default:
      return 5;
  }
}

void emit(const Ast& node, int min_prec, std::string& out) {
  const bool wrap = precedence(node) < min_prec;
  if (wrap) out += "(";
  switch (node.kind) {
    case NodeKind::kNumber:
      out += node.number.get_str(10);
      break;
    case NodeKind::kImaginary:
      out += "i";
      break;
    case NodeKind::kHbar:
      out += "hbar";
      break;
    case NodeKind::kParameter:
      out += node.name;
      break;
    case NodeKind::kGenerator:
      out += to_string(node.generator);
      break;
    case NodeKind::kAdd:
    case NodeKind::kSub:
      emit(node.children[0], 1, out);
      out += node.kind == NodeKind::kAdd ? " + " : " - ";
      emit(node.children[1], 2, out);
      break;
    case NodeKind::kMul:
    case NodeKind::kDiv:
      emit(node.children[0], 2, out);
      out += node.kind == NodeKind::kMul ? "*" : "/";
      emit(node.children[1], 3, out);
      break;
    case NodeKind::kNeg:
      out += "-";
      emit(node.children[0], 3, out);
      break;
    case NodeKind::kPow:
      emit(node.children[0], 5, out);
      out += "^" + std::to_string(node.exponent);
      break;
    case NodeKind::kRegion:
      out += ":[";
      emit(node.children[0], 0, out);
      out += "]: @" + node.name;
      break;
  }
  if (wrap) out += ")";
}

}  // namespace

std::string render_expr(const Ast& node) {
  std::string out;
  emit(node, 0, out);
  return out;
}

const ParameterDecl* ModelSpec::parameter(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const FrameDecl* ModelSpec::frame(const std::string& name) const {
  for (const auto& f : frames) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

int ModelSpec::total_modes() const {
  int n = 0;
  for (const auto& s : sets) n += s.modes;
  return n;
}

std::string render_model(const ModelSpec& spec) {
  std::ostringstream os;
  for (const auto& p : spec.parameters) {
    os << "param " << p.name;
    if (p.value) os << " = " << p.value->get_str(10);
    os << "\n";
  }
  for (const auto& s : spec.sets) os << "set " << set_name(s.set) << " " << s.modes << "\n";
  for (const auto& f : spec.frames) {
    os << "frame " << f.name << " {";
    for (std::size_t k = 0; k < f.conditions.size(); ++k) {
      os << (k == 0 ? " " : ", ") << render_expr(f.conditions[k]);
    }
    os << " }\n";
  }
  if (!spec.fiducial.empty()) os << "fiducial " << spec.fiducial << "\n";
  if (!spec.shifted.empty()) {
    os << "shifted";
    for (const auto s : spec.shifted) os << " " << set_name(s);
    os << "\n";
  }
  if (spec.truncation) os << "truncation " << *spec.truncation << "\n";
  os << "H = " << render_expr(spec.hamiltonian) << "\n";
  return os.str();
}

}  // namespace eqlab::dsl
