// Candidate abnormality rules alpha(x) and the predicate scope they are checked
// against.

#pragma once

#include <stdexcept>
#include <string>

#include "abd/formula.hpp"

namespace abd {

struct PredicateScope {
  PredSet allowed;
  PredSet forbidden;
};

enum class ScopeRule {
  MentionsAb,
  ForbiddenPredicate,
  PredicateNotAllowed,
  FreeVariables,
  ContainsImplies,
};

const char* scope_rule_name(ScopeRule r);

class ScopeError : public std::runtime_error {
 public:
  ScopeError(ScopeRule rule, const std::string& detail);
  ScopeRule rule() const { return rule_; }

 private:
  ScopeRule rule_;
};

// A formula that passed validate_hypothesis: x is its only free variable, Ab and
// implication are absent, and every predicate lies in the allowed set.
class Hypothesis {
 public:
  const Formula& formula() const { return formula_; }
  PredSet allowed() const { return allowed_; }
  std::string text() const { return render_formula(formula_); }

 private:
  friend Hypothesis validate_hypothesis(const Formula& f, const PredicateScope& scope);
  Hypothesis(Formula f, PredSet allowed) : formula_(std::move(f)), allowed_(allowed) {}

  Formula formula_;
  PredSet allowed_;
};

// Throws ScopeError naming the first violated rule.
Hypothesis validate_hypothesis(const Formula& f, const PredicateScope& scope);

// parse_formula (implication admitted so it reaches the scope check) followed by
// validate_hypothesis. FormulaError for syntax, ScopeError for scoping.
Hypothesis parse_hypothesis(std::string_view text, const PredicateScope& scope);

// Names in display order: Ab first, then P, Q, R, S.
std::vector<std::string> pred_names(PredSet s);

}  // namespace abd
