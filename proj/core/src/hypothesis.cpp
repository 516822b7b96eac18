#include "abd/hypothesis.hpp"

#include <sstream>

namespace abd {

const char* scope_rule_name(ScopeRule r) {
  switch (r) {
    case ScopeRule::MentionsAb: return "mentions-ab";
    case ScopeRule::ForbiddenPredicate: return "forbidden-predicate";
    case ScopeRule::PredicateNotAllowed: return "predicate-not-allowed";
    case ScopeRule::FreeVariables: return "free-variables";
    case ScopeRule::ContainsImplies: return "contains-implies";
  }
  return "?";
}

ScopeError::ScopeError(ScopeRule rule, const std::string& detail)
    : std::runtime_error(std::string(scope_rule_name(rule)) + ": " + detail), rule_(rule) {}

Hypothesis validate_hypothesis(const Formula& f, const PredicateScope& scope) {
  const PredSet used = predicates_used(f);
  if (used.contains(Pred::Ab)) throw ScopeError(ScopeRule::MentionsAb, "alpha must not mention Ab");
  for (Pred p : used.members()) {
    if (scope.forbidden.contains(p))
      throw ScopeError(ScopeRule::ForbiddenPredicate,
                       std::string("predicate ") + pred_name(p) + " is forbidden");
  }
  for (Pred p : used.members()) {
    if (!scope.allowed.contains(p))
      throw ScopeError(ScopeRule::PredicateNotAllowed,
                       std::string("predicate ") + pred_name(p) + " is not allowed");
  }
  const std::uint8_t fv = free_variables(f);
  if (fv != (1u << unsigned(Var::X))) {
    std::ostringstream os;
    os << "free variables {";
    bool first = true;
    for (Var v : {Var::X, Var::Y, Var::Z, Var::W}) {
      if (fv & (1u << unsigned(v))) {
        os << (first ? "" : ", ") << var_name(v);
        first = false;
      }
    }
    os << "}, expected exactly {x}";
    throw ScopeError(ScopeRule::FreeVariables, os.str());
  }
  if (contains_kind(f, Formula::Kind::Implies))
    throw ScopeError(ScopeRule::ContainsImplies, "implication is not part of the hypothesis grammar");
  return Hypothesis(f, scope.allowed);
}

Hypothesis parse_hypothesis(std::string_view text, const PredicateScope& scope) {
  return validate_hypothesis(parse_formula(text, {.allow_implies = true}), scope);
}

std::vector<std::string> pred_names(PredSet s) {
  std::vector<std::string> out;
  for (Pred p : {Pred::Ab, Pred::P, Pred::Q, Pred::R, Pred::S})
    if (s.contains(p)) out.emplace_back(pred_name(p));
  return out;
}

}  // namespace abd
