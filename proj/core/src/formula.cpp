#include "abd/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace abd {

const char* pred_name(Pred p) {
  switch (p) {
    case Pred::P: return "P";
    case Pred::Q: return "Q";
    case Pred::R: return "R";
    case Pred::S: return "S";
    case Pred::Ab: return "Ab";
  }
  return "?";
}

const char* var_name(Var v) {
  static constexpr const char* kNames[] = {"x", "y", "z", "w"};
  return kNames[static_cast<int>(v)];
}

std::vector<Pred> PredSet::members() const {
  std::vector<Pred> out;
  for (Pred p : {Pred::P, Pred::Q, Pred::R, Pred::S, Pred::Ab})
    if (contains(p)) out.push_back(p);
  return out;
}

Formula Formula::atom(Pred p, std::span<const Var> args) {
  if (static_cast<int>(args.size()) != arity(p)) {
    std::ostringstream os;
    os << "predicate " << pred_name(p) << " expects " << arity(p) << " argument(s), got "
       << args.size();
    throw FormulaError(os.str());
  }
  Formula f;
  f.kind_ = Kind::Atom;
  f.pred_ = p;
  f.nvars_ = static_cast<std::uint8_t>(args.size());
  std::copy(args.begin(), args.end(), f.vars_.begin());
  return f;
}

Formula Formula::equal(Var a, Var b) {
  Formula f;
  f.kind_ = Kind::Equal;
  f.vars_ = {a, b};
  f.nvars_ = 2;
  return f;
}

Formula Formula::negation(Formula g) {
  Formula f;
  f.kind_ = Kind::Not;
  f.children_.push_back(std::move(g));
  return f;
}

Formula Formula::conjunction(std::vector<Formula> fs) {
  if (fs.size() < 2) throw FormulaError("and requires at least 2 arguments");
  Formula f;
  f.kind_ = Kind::And;
  f.children_ = std::move(fs);
  return f;
}

Formula Formula::disjunction(std::vector<Formula> fs) {
  if (fs.size() < 2) throw FormulaError("or requires at least 2 arguments");
  Formula f;
  f.kind_ = Kind::Or;
  f.children_ = std::move(fs);
  return f;
}

Formula Formula::implies(Formula lhs, Formula rhs) {
  Formula f;
  f.kind_ = Kind::Implies;
  f.children_.push_back(std::move(lhs));
  f.children_.push_back(std::move(rhs));
  return f;
}

Formula Formula::forall(Var v, Formula body) {
  Formula f;
  f.kind_ = Kind::Forall;
  f.vars_[0] = v;
  f.nvars_ = 1;
  f.children_.push_back(std::move(body));
  return f;
}

Formula Formula::exists(Var v, Formula body) {
  Formula f = forall(v, std::move(body));
  f.kind_ = Kind::Exists;
  return f;
}

bool Formula::operator==(const Formula& o) const {
  if (kind_ != o.kind_ || nvars_ != o.nvars_) return false;
  if (kind_ == Kind::Atom && pred_ != o.pred_) return false;
  for (int i = 0; i < nvars_; ++i)
    if (vars_[i] != o.vars_[i]) return false;
  return children_ == o.children_;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
  enum Type { LParen, RParen, Symbol, End } type;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (i_ >= s_.size()) return {Token::End, "", i_};
    const std::size_t start = i_;
    if (s_[i_] == '(') return {Token::LParen, "(", i_++};
    if (s_[i_] == ')') return {Token::RParen, ")", i_++};
    while (i_ < s_.size() && s_[i_] != '(' && s_[i_] != ')' &&
           !std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
    return {Token::Symbol, std::string(s_.substr(start, i_ - start)), start};
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

[[noreturn]] void fail(const Token& t, const std::string& what) {
  std::ostringstream os;
  os << what << " at offset " << t.pos;
  if (!t.text.empty()) os << " ('" << t.text << "')";
  throw FormulaError(os.str());
}

bool looks_like_constant(const std::string& s) {
  return s.size() >= 2 && s[0] == 'a' &&
         std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

class Parser {
 public:
  Parser(std::string_view text, ParseOptions opts) : lex_(text), opts_(opts) { advance(); }

  Formula parse_top() {
    Formula f = parse();
    if (cur_.type != Token::End) fail(cur_, "trailing input after formula");
    return f;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  void expect_rparen() {
    if (cur_.type != Token::RParen) {
      if (cur_.type == Token::End) fail(cur_, "missing ')'");
      fail(cur_, "expected ')'");
    }
    advance();
  }

  Var parse_var() {
    if (cur_.type != Token::Symbol) fail(cur_, "expected a variable");
    const std::string& s = cur_.text;
    Var v;
    if (s == "x") v = Var::X;
    else if (s == "y") v = Var::Y;
    else if (s == "z") v = Var::Z;
    else if (s == "w") v = Var::W;
    else if (looks_like_constant(s)) fail(cur_, "object constant not allowed in formulas");
    else fail(cur_, "unknown variable (expected x, y, z or w)");
    advance();
    return v;
  }

  Formula parse() {
    if (cur_.type == Token::End) fail(cur_, "unexpected end of input");
    if (cur_.type == Token::RParen) fail(cur_, "unbalanced ')'");
    if (cur_.type == Token::Symbol) fail(cur_, "expected '('");
    advance();  // '('
    if (cur_.type != Token::Symbol) fail(cur_, "expected an operator or predicate");
    const Token op = cur_;
    advance();

    if (op.text == "not") {
      Formula body = parse();
      expect_rparen();
      return Formula::negation(std::move(body));
    }
    if (op.text == "and" || op.text == "or") {
      std::vector<Formula> kids;
      while (cur_.type == Token::LParen) kids.push_back(parse());
      expect_rparen();
      if (kids.size() < 2) fail(op, op.text + " requires at least 2 arguments");
      return op.text == "and" ? Formula::conjunction(std::move(kids))
                              : Formula::disjunction(std::move(kids));
    }
    if (op.text == "implies") {
      if (!opts_.allow_implies) fail(op, "implication is not permitted here");
      Formula lhs = parse();
      Formula rhs = parse();
      expect_rparen();
      return Formula::implies(std::move(lhs), std::move(rhs));
    }
    if (op.text == "forall" || op.text == "exists") {
      Var v = parse_var();
      Formula body = parse();
      expect_rparen();
      return op.text == "forall" ? Formula::forall(v, std::move(body))
                                 : Formula::exists(v, std::move(body));
    }
    if (op.text == "=") {
      Var a = parse_var();
      Var b = parse_var();
      expect_rparen();
      return Formula::equal(a, b);
    }
    Pred p;
    if (op.text == "P") p = Pred::P;
    else if (op.text == "Q") p = Pred::Q;
    else if (op.text == "R") p = Pred::R;
    else if (op.text == "S") p = Pred::S;
    else if (op.text == "Ab") p = Pred::Ab;
    else fail(op, "unknown operator");

    std::vector<Var> args;
    while (cur_.type == Token::Symbol) args.push_back(parse_var());
    if (static_cast<int>(args.size()) != arity(p)) {
      std::ostringstream os;
      os << "predicate " << pred_name(p) << " expects " << arity(p) << " argument(s), got "
         << args.size();
      fail(op, os.str());
    }
    expect_rparen();
    return Formula::atom(p, args);
  }

  Lexer lex_;
  ParseOptions opts_;
  Token cur_{Token::End, "", 0};
};

}  // namespace

Formula parse_formula(std::string_view text, ParseOptions opts) {
  return Parser(text, opts).parse_top();
}

// ---------------------------------------------------------------------------
// Rendering and measurement

namespace {

void render(const Formula& f, std::string& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
      out += '(';
      out += pred_name(f.pred());
      for (Var v : f.args()) {
        out += ' ';
        out += var_name(v);
      }
      out += ')';
      return;
    case K::Equal:
      out += "(= ";
      out += var_name(f.args()[0]);
      out += ' ';
      out += var_name(f.args()[1]);
      out += ')';
      return;
    case K::Forall:
    case K::Exists:
      out += f.kind() == K::Forall ? "(forall " : "(exists ";
      out += var_name(f.bound_var());
      out += ' ';
      render(f.child(), out);
      out += ')';
      return;
    case K::Not: out += "(not"; break;
    case K::And: out += "(and"; break;
    case K::Or: out += "(or"; break;
    case K::Implies: out += "(implies"; break;
  }
  for (const Formula& c : f.children()) {
    out += ' ';
    render(c, out);
  }
  out += ')';
}

std::uint8_t free_vars(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
    case K::Equal: {
      std::uint8_t m = 0;
      for (Var v : f.args()) m |= std::uint8_t(1u << unsigned(v));
      return m;
    }
    case K::Forall:
    case K::Exists:
      return free_vars(f.child()) & std::uint8_t(~(1u << unsigned(f.bound_var())));
    default: {
      std::uint8_t m = 0;
      for (const Formula& c : f.children()) m |= free_vars(c);
      return m;
    }
  }
}

}  // namespace

std::string render_formula(const Formula& f) {
  std::string out;
  render(f, out);
  return out;
}

FormulaMetrics formula_metrics(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
      return {1 + static_cast<int>(f.args().size()), 0};
    case K::Equal:
      return {3, 0};
    case K::Forall:
    case K::Exists: {
      FormulaMetrics m = formula_metrics(f.child());
      return {2 + m.ast_size, 1 + m.quantifier_depth};
    }
    default: {
      FormulaMetrics out{1, 0};
      for (const Formula& c : f.children()) {
        FormulaMetrics m = formula_metrics(c);
        out.ast_size += m.ast_size;
        out.quantifier_depth = std::max(out.quantifier_depth, m.quantifier_depth);
      }
      return out;
    }
  }
}

std::uint8_t free_variables(const Formula& f) { return free_vars(f); }

PredSet predicates_used(const Formula& f) {
  PredSet s;
  if (f.kind() == Formula::Kind::Atom) s.insert(f.pred());
  for (const Formula& c : f.children()) s = s | predicates_used(c);
  return s;
}

bool contains_kind(const Formula& f, Formula::Kind k) {
  if (f.kind() == k) return true;
  return std::any_of(f.children().begin(), f.children().end(),
                     [k](const Formula& c) { return contains_kind(c, k); });
}

}  // namespace abd
