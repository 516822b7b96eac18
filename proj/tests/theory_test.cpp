#include "doctest.h"

#include "abd/theory.hpp"
#include "abd/world.hpp"
#include "random_gen.hpp"

using namespace abd;

TEST_CASE("builtin theories: worked examples") {
  const TheorySpec& t1 = builtin_theory(TheoryId::T1);
  CHECK(render_formula(t1.antecedent) == "(exists y (and (R x y) (P y)))");
  CHECK(render_formula(t1.consequent) == "(Q x)");
  CHECK(t1.scope.allowed == PredSet{Pred::P, Pred::R, Pred::S});
  CHECK(t1.scope.forbidden == PredSet{Pred::Ab, Pred::Q});

  const TheorySpec& t6 = builtin_theory(TheoryId::T6);
  CHECK(render_formula(t6.antecedent) == "(P x)");
  CHECK(render_formula(t6.consequent) == "(exists y (R x y))");
  CHECK(t6.scope.forbidden == PredSet{Pred::Ab, Pred::R});

  CHECK(render_formula(builtin_theory(TheoryId::T4).consequent) ==
        "(exists z (and (S x z) (forall w (implies (R z w) (P w)))))");
}

TEST_CASE("internal ids and scenario membership") {
  const char* ids[] = {"TH2", "TH7", "TH10", "TH11", "TH12", "TH3", "TH5"};
  int k = 0;
  for (TheoryId t : all_theories()) {
    const TheorySpec& th = builtin_theory(t);
    CHECK(th.internal_id == ids[k]);
    CHECK(theory_id_from_name(th.short_id) == t);
    CHECK(theory_id_from_name(th.internal_id) == t);
    const bool skeptical_only = k >= 5;
    CHECK(th.supports(Regime::Skeptical));
    CHECK(th.supports(Regime::Full) == !skeptical_only);
    CHECK(th.supports(Regime::Partial) == !skeptical_only);
    ++k;
  }
  CHECK_THROWS_AS(theory_id_from_name("T8"), TheoryError);
}

TEST_CASE("axiom schema, scopes, and round trip") {
  for (TheoryId t : all_theories()) {
    const TheorySpec& th = builtin_theory(t);
    INFO(th.short_id);
    const Formula expect = Formula::forall(
        Var::X, Formula::implies(Formula::conjunction({th.antecedent, Formula::negation(Formula::atom(Pred::Ab, {Var::X}))}),
                                 th.consequent));
    CHECK(th.axiom == expect);
    const std::string s = render_formula(th.axiom);
    CHECK(parse_formula(s, {.allow_implies = true}) == th.axiom);
    CHECK((th.scope.allowed & th.scope.forbidden).empty());
    CHECK(th.scope.forbidden.contains(Pred::Ab));
    CHECK_FALSE(predicates_used(th.antecedent).contains(Pred::Ab));
  }
}

TEST_CASE("forbidden predicates never pass the scope check") {
  Rng rng(9);
  for (TheoryId t : all_theories()) {
    const TheorySpec& th = builtin_theory(t);
    for (Pred bad : th.scope.forbidden.members()) {
      if (bad == Pred::Ab) continue;
      testing::FormulaGenOptions opt;
      opt.preds = th.scope.allowed.members();
      for (int k = 0; k < 50; ++k) {
        const Formula base = testing::random_hypothesis_formula(rng, opt, 20);
        const Formula with_bad =
            Formula::conjunction({base, arity(bad) == 1 ? Formula::atom(bad, {Var::X}) : Formula::atom(bad, {Var::X, Var::X})});
        CHECK_NOTHROW(validate_hypothesis(base, th.scope));
        CHECK_THROWS_AS(validate_hypothesis(with_bad, th.scope), ScopeError);
      }
    }
  }
}

TEST_CASE("Ab true everywhere blocks every default") {
  Rng rng(10);
  const Hypothesis top = parse_hypothesis("(or (P x) (not (P x)))", {{Pred::P}, {Pred::Ab}});
  for (int k = 0; k < 200; ++k) {
    const World w = testing::random_world(rng, 1, 7, 0);
    for (TheoryId t : all_theories())
      CHECK(eval_formula(w, Completion(), Env(), builtin_theory(t).axiom, &top));
  }
}

TEST_CASE("custom theories are checked") {
  using enum Pred;
  CHECK(custom_theory("C1", "(P x)", "(Q x)", {P}, {Ab, Q}).experimental);
  CHECK_THROWS_AS(custom_theory("C2", "(Ab x)", "(Q x)", {P}, {Ab, Q}), TheoryError);
  CHECK_THROWS_AS(custom_theory("C3", "(P y)", "(Q x)", {P}, {Ab, Q}), TheoryError);
  CHECK_THROWS_AS(custom_theory("C4", "(P x)", "(Q x)", {P, Q}, {Ab, Q}), TheoryError);
  CHECK_THROWS_AS(custom_theory("C5", "(P x)", "(Q x)", {P}, {Q}), TheoryError);
}
