// Benchmark instance generation: gold rule, training worlds hardened against
// shortcut competitors, cheater screening, optional gold refinement and
// deterministic holdout worlds.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abd/engine.hpp"
#include "abd/templates.hpp"
#include "abd/theory.hpp"
#include "abd/world.hpp"

namespace abd {

struct GenParams {
  Regime scenario = Regime::Full;
  TheoryId theory = TheoryId::T1;
  IntRange n_range{9, 11};
  DensityRanges densities;
  UnknownRates unknown_rates;
  int world_budget = 15;
  int min_worlds = 1;  // pad accepted instances up to this many worlds
  int margin = 2;
  int pool_cap = 30;
  int holdout_count = 5;
  double exception_cap = 0.20;
  int gold_gap_slack = 1;
  double diversity_cap = 0.15;
  std::uint64_t global_seed = 0;
  bool refine_gold = false;
  int refine_candidates = 20;
  int adversarial_attempts = 200;  // candidate worlds per added world
  int shaping_steps = 300;         // local-search moves per candidate world
  int holdout_attempts = 150;      // candidate worlds per holdout world

  // Scenario defaults: domain sizes, densities and unknown rates per theory.
  static GenParams defaults(Regime scenario, TheoryId theory);
  void validate() const;
  std::string digest() const;  // stable hash of the knobs that shape output
};

UnknownRates default_unknown_rates(Regime scenario, TheoryId theory);

struct CompetitorRecord {
  std::string formula;
  Tier tier;
};

struct InstanceRecord {
  std::string id;
  Regime scenario = Regime::Full;
  TheoryId theory = TheoryId::T1;
  std::vector<World> worlds;
  std::string gold;  // canonical text
  std::string gold_template;
  std::vector<int> gold_cost;
  std::vector<int> opt_cost;
  std::vector<int> opt_cost_uniform;  // Skeptical only
  std::vector<CompetitorRecord> competitors;
  std::optional<int> cheater_margin;  // best valid cheater cost - gold cost
  std::vector<World> holdouts;
  std::vector<int> holdout_gold_cost;
  std::vector<int> holdout_opt_cost;
  bool holdout_available = false;
  struct Provenance {
    std::uint64_t global_seed = 0;
    int index = 0;
    int attempt = 0;
    std::uint64_t instance_seed = 0;
    std::string dataset_path;
    std::vector<std::uint32_t> holdout_seeds;
  } provenance;

  const TheorySpec& theory_spec() const { return builtin_theory(theory); }
  Hypothesis gold_hypothesis() const;
  int gold_total() const;
};

class GenerationError : public std::runtime_error {
 public:
  GenerationError(std::string filter, const std::string& detail)
      : std::runtime_error(filter + ": " + detail), filter_(std::move(filter)) {}
  const std::string& filter() const { return filter_; }

 private:
  std::string filter_;
};

// Per-world acceptance checks shared by training and holdout worlds.
struct WorldCheck {
  bool gold_valid = false;
  int violations = 0;
  std::optional<int> gold_cost;
  int opt = 0;
  bool passes = false;
  std::string failed;  // first failing filter, empty when passing
};

WorldCheck check_world(const GenParams& p, const World& w, const Hypothesis& gold);

// One generation attempt with a fixed gold template. Throws GenerationError
// naming the filter that could not be met.
InstanceRecord generate_instance(const GenParams& params, const std::string& template_id,
                                 std::uint64_t instance_seed, nlohmann::json* log = nullptr);

// Alternative gold selection over the accepted worlds. Returns the chosen
// gold (the seed gold when nothing better qualifies).
Hypothesis refine_gold(const GenParams& params, const std::vector<World>& worlds,
                       const Hypothesis& seed_gold, const std::vector<Competitor>& pool, Rng& rng,
                       nlohmann::json* log = nullptr);

// Fills inst.holdouts and the cached holdout values. When a holdout world
// cannot be found within the attempt budget, the instance is left without
// holdouts (holdout_available = false).
void generate_holdouts(InstanceRecord& inst, const GenParams& params, const std::string& dataset_path,
                       std::uint64_t global_seed, nlohmann::json* log = nullptr);

// Re-derives every instance invariant. Returns human-readable violations.
std::vector<std::string> audit_instance(const InstanceRecord& inst, const GenParams& params);

struct BatchParams {
  Regime scenario = Regime::Full;
  std::vector<TheoryId> theories;  // instances cycle through these
  int count = 1;
  std::uint64_t global_seed = 0;
  std::string dataset_path;
  int threads = 1;
  int max_attempts = 400;  // per instance
  int attempts_per_template = 4;
  // Overrides applied on top of GenParams::defaults.
  std::optional<int> world_budget, margin, holdouts, min_worlds;
  bool refine_gold = false;
};

GenParams params_for(const BatchParams& b, TheoryId theory);

struct BatchResult {
  std::vector<InstanceRecord> instances;
  std::vector<nlohmann::json> logs;  // one per instance
};

BatchResult generate_batch(const BatchParams& b);

std::string instance_id(Regime scenario, TheoryId theory, int index);

}  // namespace abd
