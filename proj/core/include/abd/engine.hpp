// Exact validity, cost and free-Ab lower bounds for a hypothesis against a
// theory, under the three observation regimes.
//
// Each world is searched over partial completions with three-valued (Kleene)
// evaluation: per-element truth of antecedent, consequent and alpha is cached
// once it becomes definite, and branching happens only on unknown atoms that
// an undetermined value still depends on. Pruned sub-trees stand for whole
// blocks of completions, so results match a full 2^|Omega| sweep.

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "abd/hypothesis.hpp"
#include "abd/regime.hpp"
#include "abd/theory.hpp"
#include "abd/world.hpp"

namespace abd {

// Raised when a cost is requested for a hypothesis that is not valid.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EngineVerdict {
  bool valid = true;
  std::vector<bool> per_world_valid;
  // Partial: a satisfying completion for each valid world.
  // Skeptical: a counterexample completion for each invalid world.
  std::vector<std::optional<Completion>> per_world_witness;
};

struct WorldResult {
  bool valid = false;
  std::optional<int> cost;  // set iff valid
  std::optional<Completion> witness;
};

// Validity and (when valid) cost on one world.
WorldResult evaluate_world(Regime regime, const TheorySpec& theory, const World& w,
                           const Hypothesis& alpha);
bool world_valid(Regime regime, const TheorySpec& theory, const World& w, const Hypothesis& alpha);

// Skeptical worst-case abnormal count over all completions, without the
// validity condition. Equals the regime cost for skeptically valid alpha.
int worst_case_count(const World& w, const Hypothesis& alpha);

// Graded invalidity: 0 iff valid. Full: elements violating the grounded
// axiom. Partial: fewest violating elements over completions. Skeptical:
// elements violated by at least one completion.
int violation_count(Regime regime, const TheorySpec& theory, const World& w, const Hypothesis& alpha);

EngineVerdict validity(Regime regime, const TheorySpec& theory, std::span<const World> worlds,
                       const Hypothesis& alpha);

enum class OptVariant { Pointwise, Uniform };

// Minimum |Ab| with Ab chosen freely. For Skeptical, Pointwise takes the worst
// completion of the per-completion minimum; Uniform asks for one Ab that works
// for every completion.
int opt_cost(Regime regime, const TheorySpec& theory, const World& w,
             OptVariant variant = OptVariant::Pointwise);

struct OptReport {
  Regime regime = Regime::Full;
  std::vector<int> per_world;
  int total = 0;
};

OptReport opt_costs(Regime regime, const TheorySpec& theory, std::span<const World> worlds,
                    OptVariant variant = OptVariant::Pointwise);

struct CostReport {
  Regime regime = Regime::Full;
  std::vector<int> per_world_cost;
  int total = 0;
  std::vector<int> opt_per_world;
  int opt_total = 0;
  int gap_total = 0;
  double gap_normalized = 0;
  std::optional<int> gold_cost;
  std::optional<double> gap_gold_normalized;
};

// Cost fields only. ContractError if alpha is invalid on any world.
CostReport cost(Regime regime, const TheorySpec& theory, std::span<const World> worlds,
                const Hypothesis& alpha);

// Fills the gap fields. ContractError on regime or world-count mismatch.
CostReport gaps(CostReport costs, const OptReport& opt, std::optional<int> gold_cost = std::nullopt);
CostReport gaps(CostReport costs, const OptReport& opt, const TheorySpec& theory,
                std::span<const World> worlds, const Hypothesis& gold);

}  // namespace abd
