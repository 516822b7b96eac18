// The seven single-rule default theories Ante(x) & ~Ab(x) -> Cons(x) and the
// predicate scopes their hypotheses are checked against.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "abd/formula.hpp"
#include "abd/hypothesis.hpp"
#include "abd/regime.hpp"

namespace abd {

enum class TheoryId { T1 = 1, T2, T3, T4, T5, T6, T7 };

class TheoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TheorySpec {
  std::string short_id;     // "T1"
  std::string internal_id;  // "TH2"
  Formula antecedent;       // free variable x
  Formula consequent;       // free variable x
  Formula axiom;            // (forall x (implies (and Ante (not (Ab x))) Cons))
  PredicateScope scope;
  std::vector<Regime> scenarios;
  bool experimental = false;

  bool supports(Regime r) const;
};

const TheorySpec& builtin_theory(TheoryId id);
const std::vector<TheoryId>& all_theories();
// Accepts "T1".."T7" or the internal "THn" codes.
TheoryId theory_id_from_name(std::string_view s);
const char* theory_short_name(TheoryId id);

// Builds a spec from arbitrary antecedent/consequent text. Not used by the
// benchmark pipeline; scopes are taken as given.
TheorySpec custom_theory(std::string short_id, std::string_view antecedent,
                         std::string_view consequent, PredSet allowed, PredSet forbidden);

}  // namespace abd
