#include "eqlab/dsl/parser.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace eqlab::dsl {

namespace {

enum class Tok {
  kIdent,
  kInt,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kCaret,
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kLBrace,
  kRBrace,
  kComma,
  kEquals,
  kRegionOpen,
  kRegionClose,
  kAt,
  kNewline,
  kEnd,
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kInt: return "integer";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kStar: return "'*'";
    case Tok::kSlash: return "'/'";
    case Tok::kCaret: return "'^'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kLBracket: return "'['";
    case Tok::kRBracket: return "']'";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kComma: return "','";
    case Tok::kEquals: return "'='";
    case Tok::kRegionOpen: return "':['";
    case Tok::kRegionClose: return "']:'";
    case Tok::kAt: return "'@'";
    case Tok::kNewline: return "end of line";
    case Tok::kEnd: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::vector<ParseDiagnostic>& diags) : text_(text), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      const SourceSpan start = here();
      if (c == '\n') {
        out.push_back({Tok::kNewline, "\n", with_length(start, 1)});
        advance();
        continue;
      }
      if (is_digit(c)) {
        std::string digits;
        while (pos_ < text_.size() && is_digit(text_[pos_])) {
          digits += text_[pos_];
          advance();
        }
        out.push_back({Tok::kInt, digits, with_length(start, static_cast<int>(digits.size()))});
        continue;
      }
      if (is_ident_start(c)) {
        std::string ident;
        while (pos_ < text_.size() && (is_ident_start(text_[pos_]) || is_digit(text_[pos_]))) {
          ident += text_[pos_];
          advance();
        }
        out.push_back({Tok::kIdent, ident, with_length(start, static_cast<int>(ident.size()))});
        continue;
      }
      const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
      if (c == ':' && next == '[') {
        out.push_back({Tok::kRegionOpen, ":[", with_length(start, 2)});
        advance();
        advance();
        continue;
      }
      if (c == ']' && next == ':') {
        out.push_back({Tok::kRegionClose, "]:", with_length(start, 2)});
        advance();
        advance();
        continue;
      }
      Tok kind;
      switch (c) {
        case '+': kind = Tok::kPlus; break;
        case '-': kind = Tok::kMinus; break;
        case '*': kind = Tok::kStar; break;
        case '/': kind = Tok::kSlash; break;
        case '^': kind = Tok::kCaret; break;
        case '(': kind = Tok::kLParen; break;
        case ')': kind = Tok::kRParen; break;
        case '[': kind = Tok::kLBracket; break;
        case ']': kind = Tok::kRBracket; break;
        case '{': kind = Tok::kLBrace; break;
        case '}': kind = Tok::kRBrace; break;
        case ',': kind = Tok::kComma; break;
        case '=': kind = Tok::kEquals; break;
        case '@': kind = Tok::kAt; break;
        default: {
          ParseDiagnostic d;
          d.span = with_length(start, 1);
          const auto byte = static_cast<unsigned char>(c);
          d.message = byte >= 0x20 && byte < 0x7f ? std::string("unexpected character '") + c + "'"
                                                  : "unexpected byte 0x" + hex(byte);
          diags_.push_back(d);
          advance();
          continue;
        }
      }
      out.push_back({kind, std::string(1, c), with_length(start, 1)});
      advance();
    }
    out.push_back({Tok::kEnd, "", here()});
    return out;
  }

 private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static std::string hex(unsigned char b) {
    const char* digits = "0123456789abcdef";
    return {digits[b >> 4], digits[b & 15]};
  }

  SourceSpan here() const { return {line_, column_, 0, pos_}; }
  static SourceSpan with_length(SourceSpan s, int length) {
    s.length = length;
    return s;
  }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::vector<ParseDiagnostic>& diags_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

struct Abort {};

constexpr int kMaxNesting = 200;
constexpr int kMaxExponent = 64;

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<ParseDiagnostic>& diags)
      : toks_(std::move(tokens)), diags_(diags) {}

  ModelSpec parse_model(bool& saw_hamiltonian, SourceSpan& end_span) {
    ModelSpec spec;
    std::set<std::string> seen_sets;
    bool saw_fiducial = false;
    bool saw_shifted = false;
    while (true) {
      skip_newlines();
      if (at(Tok::kEnd)) break;
      try {
        statement(spec, saw_hamiltonian, saw_fiducial, saw_shifted, seen_sets);
        if (!at(Tok::kNewline) && !at(Tok::kEnd)) fail(peek(), "unexpected " + std::string(describe(peek().kind)), "end of line");
      } catch (const Abort&) {
        nest_ = 0;
        depth_ = 0;
        while (!at(Tok::kNewline) && !at(Tok::kEnd)) ++pos_;
      }
    }
    end_span = peek().span;
    return spec;
  }

  std::optional<Ast> parse_single_expression() {
    try {
      skip_newlines();
      Ast e = expr();
      skip_newlines();
      if (!at(Tok::kEnd)) fail(peek(), "unexpected " + std::string(describe(peek().kind)), "end of input");
      return e;
    } catch (const Abort&) {
      return std::nullopt;
    }
  }

 private:
  const Token& peek() {
    if (nest_ > 0) {
      while (toks_[pos_].kind == Tok::kNewline) ++pos_;
    }
    return toks_[pos_];
  }
  bool at(Tok kind) { return peek().kind == kind; }
  const Token& take() {
    const Token& t = peek();
    if (t.kind != Tok::kEnd) ++pos_;
    return t;
  }
  void skip_newlines() {
    while (toks_[pos_].kind == Tok::kNewline) ++pos_;
  }

  [[noreturn]] void fail(const Token& at_token, const std::string& message, const std::string& hint = "") {
    ParseDiagnostic d;
    d.span = at_token.span;
    d.message = message;
    d.hint = hint;
    diags_.push_back(d);
    throw Abort{};
  }

  void error(const SourceSpan& span, const std::string& message) {
    ParseDiagnostic d;
    d.span = span;
    d.message = message;
    diags_.push_back(d);
  }

  const Token& expect(Tok kind, const std::string& what) {
    if (!at(kind)) {
      fail(peek(), "expected " + what, what);
    }
    return take();
  }

  std::string ident(const std::string& what) { return expect(Tok::kIdent, what).text; }

  std::optional<int> small_int(const Token& t, long max) {
    if (t.text.size() > 9) return std::nullopt;
    const long v = std::stol(t.text);
    if (v > max) return std::nullopt;
    return static_cast<int>(v);
  }

  Rational rational_literal() {
    bool negative = false;
    if (at(Tok::kMinus)) {
      take();
      negative = true;
    }
    const Token& num = expect(Tok::kInt, "integer");
    mpz_class n(num.text, 10);
    mpz_class d(1);
    if (at(Tok::kSlash)) {
      take();
      const Token& den = expect(Tok::kInt, "integer");
      d = mpz_class(den.text, 10);
      if (d == 0) fail(den, "zero denominator");
    }
    Rational value(n, d);
    value.canonicalize();
    return negative ? Rational(-value) : value;
  }

  void statement(ModelSpec& spec, bool& saw_h, bool& saw_fiducial, bool& saw_shifted, std::set<std::string>& seen_sets) {
    const Token& kw = peek();
    if (kw.kind != Tok::kIdent) {
      fail(kw, "expected a statement", "param, set, frame, fiducial, shifted, truncation or H");
    }
    take();
    if (kw.text == "param") {
      const Token& name = expect(Tok::kIdent, "parameter name");
      if (name.text == "i" || name.text == "Q" || name.text == "P" || name.text == "S" || name.text == "R") {
        fail(name, "'" + name.text + "' is reserved");
      }
      if (spec.parameter(name.text)) fail(name, "duplicate declaration of parameter '" + name.text + "'");
      ParameterDecl decl{name.text, std::nullopt};
      if (at(Tok::kEquals)) {
        take();
        decl.value = rational_literal();
      }
      spec.parameters.push_back(decl);
    } else if (kw.text == "set") {
      const Token& name = expect(Tok::kIdent, "set name");
      const auto set = parse_set_name(name.text);
      if (!set) fail(name, "unknown operator set '" + name.text + "'", "pq or rs");
      if (!seen_sets.insert(name.text).second) fail(name, "duplicate declaration of set '" + name.text + "'");
      const Token& count = expect(Tok::kInt, "mode count");
      const auto n = small_int(count, 64);
      if (!n || *n < 1) fail(count, "mode count must be between 1 and 64");
      spec.sets.push_back({*set, *n});
    } else if (kw.text == "frame") {
      const Token& name = expect(Tok::kIdent, "frame name");
      if (spec.frame(name.text)) fail(name, "duplicate declaration of frame '" + name.text + "'");
      FrameDecl decl{name.text, {}};
      expect(Tok::kLBrace, "'{'");
      ++nest_;
      decl.conditions.push_back(expr());
      while (at(Tok::kComma)) {
        take();
        decl.conditions.push_back(expr());
      }
      expect(Tok::kRBrace, "'}'");
      --nest_;
      spec.frames.push_back(std::move(decl));
    } else if (kw.text == "fiducial") {
      const Token& name = expect(Tok::kIdent, "frame name");
      if (saw_fiducial) fail(name, "duplicate fiducial declaration");
      saw_fiducial = true;
      spec.fiducial = name.text;
      fiducial_span_ = name.span;
    } else if (kw.text == "shifted") {
      if (saw_shifted) fail(kw, "duplicate shifted declaration");
      saw_shifted = true;
      do {
        const Token& name = expect(Tok::kIdent, "set name");
        const auto set = parse_set_name(name.text);
        if (!set) fail(name, "unknown operator set '" + name.text + "'", "pq or rs");
        if (std::find(spec.shifted.begin(), spec.shifted.end(), *set) != spec.shifted.end()) {
          fail(name, "set '" + name.text + "' listed twice");
        }
        spec.shifted.push_back(*set);
      } while (at(Tok::kIdent));
    } else if (kw.text == "truncation") {
      if (spec.truncation) fail(kw, "duplicate truncation declaration");
      const Token& count = expect(Tok::kInt, "truncation dimension");
      const auto n = small_int(count, 4096);
      if (!n || *n < 1) fail(count, "truncation must be between 1 and 4096");
      spec.truncation = *n;
    } else if (kw.text == "H") {
      if (saw_h) fail(kw, "duplicate declaration of H");
      expect(Tok::kEquals, "'='");
      spec.hamiltonian = expr();
      saw_h = true;
    } else {
      fail(kw, "unknown statement '" + kw.text + "'", "param, set, frame, fiducial, shifted, truncation or H");
    }
  }

  static SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
    SourceSpan s = a;
    if (b.offset + b.length > a.offset && b.line == a.line) {
      s.length = static_cast<int>(b.offset + b.length - a.offset);
    }
    return s;
  }

  Ast node(NodeKind kind, std::vector<Ast> children, const SourceSpan& span) {
    Ast n;
    n.kind = kind;
    n.children = std::move(children);
    n.span = span;
    return n;
  }

  void enter(const Token& t) {
    if (++depth_ > kMaxNesting) fail(t, "expression nested too deeply");
  }

  Ast expr() {
    enter(peek());
    Ast left = term();
    while (at(Tok::kPlus) || at(Tok::kMinus)) {
      const bool plus = take().kind == Tok::kPlus;
      Ast right = term();
      const SourceSpan span = join(left.span, right.span);
      left = node(plus ? NodeKind::kAdd : NodeKind::kSub, {std::move(left), std::move(right)}, span);
    }
    --depth_;
    return left;
  }

  Ast term() {
    Ast left = unary();
    while (at(Tok::kStar) || at(Tok::kSlash)) {
      const bool mul = take().kind == Tok::kStar;
      Ast right = unary();
      const SourceSpan span = join(left.span, right.span);
      left = node(mul ? NodeKind::kMul : NodeKind::kDiv, {std::move(left), std::move(right)}, span);
    }
    return left;
  }

  Ast unary() {
    if (at(Tok::kMinus)) {
      const Token& minus = take();
      enter(minus);
      Ast operand = unary();
      --depth_;
      const SourceSpan span = join(minus.span, operand.span);
      return node(NodeKind::kNeg, {std::move(operand)}, span);
    }
    return power();
  }

  Ast power() {
    Ast base = primary();
    if (at(Tok::kCaret)) {
      take();
      const Token& e = expect(Tok::kInt, "integer exponent");
      const auto value = small_int(e, kMaxExponent);
      if (!value) fail(e, "exponent too large (limit " + std::to_string(kMaxExponent) + ")");
      const SourceSpan span = join(base.span, e.span);
      Ast n = node(NodeKind::kPow, {std::move(base)}, span);
      n.exponent = *value;
      return n;
    }
    return base;
  }

  Ast primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kInt: {
        take();
        Ast n = node(NodeKind::kNumber, {}, t.span);
        n.number = Rational(mpz_class(t.text, 10));
        return n;
      }
      case Tok::kIdent: {
        take();
        if (t.text == "i") return node(NodeKind::kImaginary, {}, t.span);
        if (t.text == "hbar") return node(NodeKind::kHbar, {}, t.span);
        if (t.text == "Q" || t.text == "P" || t.text == "S" || t.text == "R") {
          expect(Tok::kLBracket, "'['");
          const Token& index = expect(Tok::kInt, "mode index");
          const auto mode = small_int(index, 65535);
          if (!mode) fail(index, "mode index too large");
          const Token& close = expect(Tok::kRBracket, "']'");
          Ast n = node(NodeKind::kGenerator, {}, join(t.span, close.span));
          const OperatorSet set = (t.text == "Q" || t.text == "P") ? OperatorSet::kPQ : OperatorSet::kRS;
          const GeneratorKind kind =
              (t.text == "Q" || t.text == "S") ? GeneratorKind::kPosition : GeneratorKind::kMomentum;
          n.generator = Generator{set, static_cast<std::uint16_t>(*mode), kind};
          return n;
        }
        Ast n = node(NodeKind::kParameter, {}, t.span);
        n.name = t.text;
        return n;
      }
      case Tok::kLParen: {
        take();
        ++nest_;
        Ast inner = expr();
        expect(Tok::kRParen, "')'");
        --nest_;
        return inner;
      }
      case Tok::kRegionOpen: {
        take();
        ++nest_;
        Ast inner = expr();
        expect(Tok::kRegionClose, "']:'");
        --nest_;
        expect(Tok::kAt, "'@' and a frame name");
        const Token& name = expect(Tok::kIdent, "frame name");
        Ast n = node(NodeKind::kRegion, {std::move(inner)}, join(t.span, name.span));
        n.name = name.text;
        return n;
      }
      default:
        fail(t, "unexpected " + std::string(describe(t.kind)), "expression");
    }
  }

  std::vector<Token> toks_;
  std::vector<ParseDiagnostic>& diags_;
  std::size_t pos_ = 0;
  int nest_ = 0;
  int depth_ = 0;

 public:
  SourceSpan fiducial_span_;
};

// Walks an expression, reporting unknown parameters, undeclared frames and
// generators outside the declared sets.
class Resolver {
 public:
  Resolver(const ModelSpec& spec, std::vector<ParseDiagnostic>& diags) : spec_(spec), diags_(diags) {
    for (const auto& s : spec.sets) modes_[s.set] = s.modes;
  }

  void check(const Ast& n) {
    switch (n.kind) {
      case NodeKind::kParameter:
        if (!spec_.parameter(n.name)) report(n.span, "unknown identifier '" + n.name + "'");
        break;
      case NodeKind::kGenerator: {
        if (modes_.empty()) break;
        auto it = modes_.find(n.generator.set);
        if (it == modes_.end()) {
          report(n.span, "generator " + to_string(n.generator) + " belongs to undeclared set '" +
                             set_name(n.generator.set) + "'");
        } else if (n.generator.mode >= it->second) {
          report(n.span, "arity mismatch: set " + std::string(set_name(n.generator.set)) + " has " +
                             std::to_string(it->second) + " mode(s)");
        }
        break;
      }
      case NodeKind::kRegion:
        if (!spec_.frame(n.name)) report(n.span, "unknown frame '" + n.name + "'");
        break;
      default:
        break;
    }
    for (const auto& c : n.children) check(c);
  }

 private:
  void report(const SourceSpan& span, const std::string& message) {
    ParseDiagnostic d;
    d.span = span;
    d.message = message;
    diags_.push_back(d);
  }

  const ModelSpec& spec_;
  std::vector<ParseDiagnostic>& diags_;
  std::map<OperatorSet, int> modes_;
};

void collect_generators(const Ast& n, std::map<OperatorSet, int>& max_mode) {
  if (n.kind == NodeKind::kGenerator) {
    auto& m = max_mode[n.generator.set];
    m = std::max(m, static_cast<int>(n.generator.mode) + 1);
  }
  for (const auto& c : n.children) collect_generators(c, max_mode);
}

bool has_errors(const std::vector<ParseDiagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const auto& d) { return d.severity == Severity::kError; });
}

}  // namespace

ParseResult parse_model(std::string_view text) {
  ParseResult result;
  Lexer lexer(text, result.diagnostics);
  Parser parser(lexer.run(), result.diagnostics);
  bool saw_h = false;
  SourceSpan end_span;
  ModelSpec spec = parser.parse_model(saw_h, end_span);

  if (!saw_h && !has_errors(result.diagnostics)) {
    ParseDiagnostic d;
    d.span = end_span;
    d.message = "missing Hamiltonian";
    d.hint = "'H = <expr>'";
    result.diagnostics.push_back(d);
  }
  if (has_errors(result.diagnostics)) return result;

  if (spec.sets.empty()) {
    std::map<OperatorSet, int> inferred;
    collect_generators(spec.hamiltonian, inferred);
    for (const auto& f : spec.frames) {
      for (const auto& c : f.conditions) collect_generators(c, inferred);
    }
    for (const auto& [set, n] : inferred) spec.sets.push_back({set, n});
  }
  if (spec.shifted.empty()) {
    for (const auto& s : spec.sets) {
      if (s.set == OperatorSet::kPQ) spec.shifted.push_back(OperatorSet::kPQ);
    }
  }

  Resolver resolver(spec, result.diagnostics);
  resolver.check(spec.hamiltonian);
  for (const auto& f : spec.frames) {
    for (const auto& c : f.conditions) resolver.check(c);
  }
  if (!spec.fiducial.empty() && !spec.frame(spec.fiducial)) {
    ParseDiagnostic d;
    d.span = parser.fiducial_span_;
    d.message = "unknown frame '" + spec.fiducial + "'";
    result.diagnostics.push_back(d);
  }
  for (const auto s : spec.shifted) {
    const bool declared = std::any_of(spec.sets.begin(), spec.sets.end(), [&](const auto& d) { return d.set == s; });
    if (!declared) {
      ParseDiagnostic d;
      d.span = end_span;
      d.message = "shifted set '" + std::string(set_name(s)) + "' is not declared";
      result.diagnostics.push_back(d);
    }
  }
  if (!has_errors(result.diagnostics)) result.model = std::move(spec);
  return result;
}

ExprResult parse_expression(std::string_view text, const ModelSpec* context) {
  ExprResult result;
  Lexer lexer(text, result.diagnostics);
  Parser parser(lexer.run(), result.diagnostics);
  auto e = parser.parse_single_expression();
  if (!e || has_errors(result.diagnostics)) return result;
  if (context) {
    Resolver resolver(*context, result.diagnostics);
    resolver.check(*e);
    if (has_errors(result.diagnostics)) return result;
  }
  result.expr = std::move(e);
  return result;
}

}  // namespace eqlab::dsl
