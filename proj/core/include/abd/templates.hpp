// Gold-rule templates and the shortcut competitor pool.
//
// Both lists are reconstructions: the template family spans the quantifier
// depths and sizes the benchmark describes, and the shortcut lists follow the
// described categories plus the quoted examples.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abd/hypothesis.hpp"
#include "abd/rng.hpp"
#include "abd/theory.hpp"

namespace abd {

struct GoldTemplate {
  std::string id;
  bool needs_two_unary = false;
};

// The whole family, in a fixed order.
const std::vector<GoldTemplate>& gold_templates();
// Templates instantiable under this theory's allowed predicates.
std::vector<std::string> usable_templates(const TheorySpec& theory);

// One instantiation of the template with slots drawn from the allowed
// predicates. nullopt if the template cannot be filled for this theory.
std::optional<Hypothesis> instantiate_template(const std::string& id, const TheorySpec& theory, Rng& rng);

// True if alpha & Ante & ~Cons can hold at some element of a small random
// world, i.e. alpha is able to mark a forced element abnormal at all.
bool gold_compatible(const Hypothesis& alpha, const TheorySpec& theory);

enum class Tier { Tier1, Tier2, Mutant };
const char* tier_name(Tier t);

struct Competitor {
  Hypothesis hypothesis;
  Tier tier;
};

// Curated shortcuts (constants, literals, self-loops, simple existence,
// unary pairs), restricted to the theory scope.
std::vector<Hypothesis> tier1_shortcuts(const TheorySpec& theory);
// Mined-style shortcuts from a fixed list, restricted to the theory scope.
std::vector<Hypothesis> tier2_shortcuts(const TheorySpec& theory);
const std::vector<std::string>& tier2_shortcut_texts();

// All single-site mutations of f: and/or flip, forall/exists swap, deletion
// of a conjunct/disjunct, negation added or removed. Unscoped.
std::vector<Formula> single_mutations(const Formula& f);
// Up to `limit` scope-valid mutants of gold, pairwise distinct and not
// equivalent to gold on probe worlds.
std::vector<Hypothesis> gold_mutants(const Hypothesis& gold, const TheorySpec& theory, Rng& rng,
                                     int limit = 10);

// Agreement of alpha and beta at every element of a fixed set of random
// closed worlds. A necessary condition for logical equivalence.
bool probe_equivalent(const Formula& a, const Formula& b);

// Tier-1 entries, then mutants, then tier-2 entries; duplicates and
// gold-equivalent entries dropped; truncated to cap.
std::vector<Competitor> build_competitor_pool(const TheorySpec& theory, const Hypothesis& gold,
                                              Rng& rng, int cap = 30);

}  // namespace abd
