// First-order formulas over the signature {P, Q, R, S, =, Ab} and their
// S-expression surface syntax.
//
// A Formula is an immutable value. Construction through the static factories
// enforces the structural invariants (connective arity, atom arity), so every
// Formula that exists is well-formed.

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abd {

enum class Var : std::uint8_t { X = 0, Y = 1, Z = 2, W = 3 };
inline constexpr int kNumVars = 4;

enum class Pred : std::uint8_t { P = 0, Q = 1, R = 2, S = 3, Ab = 4 };
inline constexpr int kNumObservedPreds = 4;  // P, Q, R, S

constexpr int arity(Pred p) { return (p == Pred::R || p == Pred::S) ? 2 : 1; }
const char* pred_name(Pred p);
const char* var_name(Var v);

// Small bit set over Pred.
class PredSet {
 public:
  constexpr PredSet() = default;
  constexpr PredSet(std::initializer_list<Pred> ps) {
    for (Pred p : ps) bits_ |= bit(p);
  }
  constexpr bool contains(Pred p) const { return (bits_ & bit(p)) != 0; }
  constexpr void insert(Pred p) { bits_ |= bit(p); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr PredSet operator&(PredSet o) const { return from_bits(bits_ & o.bits_); }
  constexpr PredSet operator|(PredSet o) const { return from_bits(bits_ | o.bits_); }
  constexpr bool operator==(const PredSet&) const = default;
  std::vector<Pred> members() const;
  std::uint8_t bits() const { return bits_; }

 private:
  static constexpr std::uint8_t bit(Pred p) { return std::uint8_t(1u << unsigned(p)); }
  static constexpr PredSet from_bits(std::uint8_t b) {
    PredSet s;
    s.bits_ = b;
    return s;
  }
  std::uint8_t bits_ = 0;
};

// Raised by the parser and by the Formula factories.
class FormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Formula {
 public:
  enum class Kind : std::uint8_t { Atom, Equal, Not, And, Or, Implies, Forall, Exists };

  static Formula atom(Pred p, std::span<const Var> args);
  static Formula atom(Pred p, std::initializer_list<Var> args) {
    return atom(p, std::span<const Var>(args.begin(), args.size()));
  }
  static Formula equal(Var a, Var b);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> fs);
  static Formula disjunction(std::vector<Formula> fs);
  static Formula implies(Formula lhs, Formula rhs);
  static Formula forall(Var v, Formula body);
  static Formula exists(Var v, Formula body);

  Kind kind() const { return kind_; }
  bool is_quantifier() const { return kind_ == Kind::Forall || kind_ == Kind::Exists; }

  // Atom only.
  Pred pred() const { return pred_; }
  // Atom / Equal: argument variables. Quantifiers: the bound variable.
  std::span<const Var> args() const { return {vars_.data(), nvars_}; }
  Var bound_var() const { return vars_[0]; }
  // Not / And / Or / Implies / quantifiers.
  const std::vector<Formula>& children() const { return children_; }
  const Formula& child(std::size_t i = 0) const { return children_.at(i); }

  bool operator==(const Formula& o) const;

 private:
  Formula() = default;

  Kind kind_ = Kind::Atom;
  Pred pred_ = Pred::P;
  std::array<Var, 2> vars_{Var::X, Var::X};
  std::uint8_t nvars_ = 0;
  std::vector<Formula> children_;
};

struct ParseOptions {
  bool allow_implies = false;
};

Formula parse_formula(std::string_view text, ParseOptions opts = {});

// Canonical form: lowercase operators, single spaces, no redundant parentheses.
std::string render_formula(const Formula& f);

struct FormulaMetrics {
  int ast_size = 0;
  int quantifier_depth = 0;
  bool operator==(const FormulaMetrics&) const = default;
};

FormulaMetrics formula_metrics(const Formula& f);

// Variables occurring free, as a bit set indexed by Var.
std::uint8_t free_variables(const Formula& f);
PredSet predicates_used(const Formula& f);
bool contains_kind(const Formula& f, Formula::Kind k);

}  // namespace abd
