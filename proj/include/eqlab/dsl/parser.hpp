#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "eqlab/dsl/ast.hpp"

namespace eqlab::dsl {

struct ParseResult {
  std::optional<ModelSpec> model;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

// Parses a .eqm model. Never throws on malformed input: every rejection
// carries at least one diagnostic whose span lies inside `text`.
ParseResult parse_model(std::string_view text);

struct ExprResult {
  std::optional<Ast> expr;
  std::vector<ParseDiagnostic> diagnostics;
};

// Parses a single expression. With `context`, identifiers and frame names
// are resolved against the model's declarations.
ExprResult parse_expression(std::string_view text, const ModelSpec* context = nullptr);

}  // namespace eqlab::dsl
