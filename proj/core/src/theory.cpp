#include "abd/theory.hpp"

#include <algorithm>
#include <array>

namespace abd {

bool TheorySpec::supports(Regime r) const {
  return std::find(scenarios.begin(), scenarios.end(), r) != scenarios.end();
}

namespace {

Formula make_axiom(const Formula& ante, const Formula& cons) {
  Formula guard = Formula::conjunction({ante, Formula::negation(Formula::atom(Pred::Ab, {Var::X}))});
  return Formula::forall(Var::X, Formula::implies(std::move(guard), cons));
}

TheorySpec make(std::string short_id, std::string internal_id, std::string_view ante,
                std::string_view cons, PredSet allowed, PredSet forbidden,
                std::vector<Regime> scenarios, bool experimental) {
  const ParseOptions opts{.allow_implies = true};
  Formula a = parse_formula(ante, opts);
  Formula c = parse_formula(cons, opts);
  const std::uint8_t x_only = 1u << unsigned(Var::X);
  if (free_variables(a) != x_only || free_variables(c) != x_only)
    throw TheoryError("antecedent and consequent must have exactly the free variable x");
  if ((allowed & forbidden) != PredSet{}) throw TheoryError("allowed and forbidden overlap");
  if (!forbidden.contains(Pred::Ab)) throw TheoryError("Ab must be forbidden");
  if (predicates_used(a).contains(Pred::Ab) || predicates_used(c).contains(Pred::Ab))
    throw TheoryError("Ab may only occur in the guard of the default");
  Formula ax = make_axiom(a, c);
  return TheorySpec{std::move(short_id), std::move(internal_id), std::move(a), std::move(c),
                    std::move(ax), PredicateScope{allowed, forbidden}, std::move(scenarios),
                    experimental};
}

std::vector<TheorySpec> build_all() {
  using enum Pred;
  const std::vector<Regime> all{Regime::Full, Regime::Partial, Regime::Skeptical};
  const std::vector<Regime> skep{Regime::Skeptical};
  const char* rp = "(exists y (and (R x y) (P y)))";
  std::vector<TheorySpec> v;
  v.push_back(make("T1", "TH2", rp, "(Q x)", {P, R, S}, {Ab, Q}, all, false));
  v.push_back(make("T2", "TH7", rp, "(exists z (and (S x z) (Q z)))", {P, R}, {Ab, S, Q}, all, false));
  v.push_back(make("T3", "TH10", "(exists y (and (S x y) (P y)))", "(exists z (and (R x z) (Q z)))",
                   {P, S}, {Ab, R, Q}, all, false));
  v.push_back(make("T4", "TH11", rp, "(exists z (and (S x z) (forall w (implies (R z w) (P w)))))",
                   {P, Q, R}, {Ab, S}, all, false));
  v.push_back(make("T5", "TH12", rp, "(forall z (implies (S x z) (Q z)))", {P, R, S}, {Ab, Q}, all,
                   false));
  v.push_back(make("T6", "TH3", "(P x)", "(exists y (R x y))", {P, Q, S}, {Ab, R}, skep, false));
  v.push_back(make("T7", "TH5", "(P x)", "(forall y (implies (R x y) (Q y)))", {P, R, S}, {Ab, Q},
                   skep, false));
  return v;
}

}  // namespace

const TheorySpec& builtin_theory(TheoryId id) {
  static const std::vector<TheorySpec> specs = build_all();
  const int k = static_cast<int>(id);
  if (k < 1 || k > 7) throw TheoryError("unknown theory id");
  return specs[k - 1];
}

const std::vector<TheoryId>& all_theories() {
  static const std::vector<TheoryId> ids{TheoryId::T1, TheoryId::T2, TheoryId::T3, TheoryId::T4,
                                         TheoryId::T5, TheoryId::T6, TheoryId::T7};
  return ids;
}

const char* theory_short_name(TheoryId id) {
  static constexpr std::array<const char*, 7> names{"T1", "T2", "T3", "T4", "T5", "T6", "T7"};
  const int k = static_cast<int>(id);
  if (k < 1 || k > 7) throw TheoryError("unknown theory id");
  return names[k - 1];
}

TheoryId theory_id_from_name(std::string_view s) {
  for (TheoryId id : all_theories()) {
    const TheorySpec& t = builtin_theory(id);
    if (s == t.short_id || s == t.internal_id) return id;
  }
  throw TheoryError("unknown theory '" + std::string(s) + "'");
}

TheorySpec custom_theory(std::string short_id, std::string_view antecedent,
                         std::string_view consequent, PredSet allowed, PredSet forbidden) {
  return make(short_id, "custom", antecedent, consequent, allowed, forbidden,
              {Regime::Full, Regime::Partial, Regime::Skeptical}, true);
}

}  // namespace abd
