#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "eqlab/operator_expr.hpp"
#include "eqlab/scalar.hpp"

namespace eqlab::dsl {

struct SourceSpan {
  int line = 1;    // 1-based
  int column = 1;  // 1-based, in bytes
  int length = 0;
  std::size_t offset = 0;
};

enum class Severity { kError, kWarning };

struct ParseDiagnostic {
  Severity severity = Severity::kError;
  SourceSpan span;
  std::string message;
  std::string hint;  // expected-token hint, may be empty
};

// `file:line:col: severity: message`
std::string render(const ParseDiagnostic& d, const std::string& file);

enum class NodeKind {
  kNumber,     // non-negative integer literal; rationals are kDiv of two
  kImaginary,  // i
  kHbar,
  kParameter,
  kGenerator,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kPow,
  kRegion,  // :[ child ]: @name
};

/// Expression tree as written. Parentheses are not stored; rendering
/// re-inserts them from precedence. Equality ignores source spans.
struct Ast {
  NodeKind kind = NodeKind::kNumber;
  Rational number{0};
  std::string name;
  Generator generator;
  int exponent = 0;
  std::vector<Ast> children;
  SourceSpan span;

  friend bool operator==(const Ast& a, const Ast& b);
};

std::string render_expr(const Ast& node);

struct ParameterDecl {
  std::string name;
  std::optional<Rational> value;
  friend bool operator==(const ParameterDecl&, const ParameterDecl&) = default;
};

struct SetDecl {
  OperatorSet set = OperatorSet::kPQ;
  int modes = 1;
  friend bool operator==(const SetDecl&, const SetDecl&) = default;
};

struct FrameDecl {
  std::string name;
  std::vector<Ast> conditions;
  friend bool operator==(const FrameDecl&, const FrameDecl&) = default;
};

/// Parsed model: declarations in source order plus the Hamiltonian tree.
struct ModelSpec {
  std::vector<ParameterDecl> parameters;
  std::vector<SetDecl> sets;
  std::vector<FrameDecl> frames;
  std::string fiducial;  // frame name; empty selects the default vacuum frame
  std::vector<OperatorSet> shifted;
  std::optional<int> truncation;
  Ast hamiltonian;

  const ParameterDecl* parameter(const std::string& name) const;
  const FrameDecl* frame(const std::string& name) const;
  int total_modes() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

std::string render_model(const ModelSpec& spec);

}  // namespace eqlab::dsl
