#include "abd/generator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "abd/seeding.hpp"

namespace abd {

using nlohmann::json;

UnknownRates default_unknown_rates(Regime scenario, TheoryId theory) {
  UnknownRates u;
  const int r = static_cast<int>(Pred::R), s = static_cast<int>(Pred::S);
  switch (scenario) {
    case Regime::Full: break;
    case Regime::Partial:
      u.rate[r] = 0.20;
      u.rate[s] = 0.10;
      break;
    case Regime::Skeptical:
      switch (theory) {
        case TheoryId::T1: u.rate[r] = 0.05, u.rate[s] = 0.08; break;
        case TheoryId::T6: u.rate[r] = 0.04, u.rate[s] = 0.08; break;
        case TheoryId::T7: u.rate[r] = 0.05, u.rate[s] = 0.08; break;
        default: u.rate[r] = 0.05, u.rate[s] = 0.05; break;
      }
      break;
  }
  return u;
}

GenParams GenParams::defaults(Regime scenario, TheoryId theory) {
  GenParams p;
  p.scenario = scenario;
  p.theory = theory;
  p.n_range = scenario == Regime::Skeptical ? IntRange{10, 12} : IntRange{9, 11};
  p.densities = DensityRanges::for_regime(scenario);
  p.unknown_rates = default_unknown_rates(scenario, theory);
  switch (scenario) {
    case Regime::Full: p.min_worlds = 9; break;
    case Regime::Partial: p.min_worlds = 8; break;
    case Regime::Skeptical: p.min_worlds = 6; break;
  }
  return p;
}

void GenParams::validate() const {
  const TheorySpec& th = builtin_theory(theory);
  if (!th.supports(scenario))
    throw GenerationError("params", th.short_id + " is not used in the " + regime_name(scenario) +
                                        " scenario");
  if (n_range.empty() || n_range.lo < 1) throw GenerationError("params", "empty domain-size range");
  densities.validate();
  if (world_budget < 1) throw GenerationError("params", "world budget must be positive");
  if (min_worlds > world_budget) throw GenerationError("params", "min_worlds exceeds the world budget");
  if (margin < 1) throw GenerationError("params", "margin must be at least 1");
  if (pool_cap < 1) throw GenerationError("params", "pool cap must be at least 1");
  if (holdout_count < 0) throw GenerationError("params", "negative holdout count");
}

std::string GenParams::digest() const {
  json j = {{"scenario", regime_name(scenario)},
            {"theory", builtin_theory(theory).short_id},
            {"n_range", {n_range.lo, n_range.hi}},
            {"world_budget", world_budget},
            {"min_worlds", min_worlds},
            {"margin", margin},
            {"pool_cap", pool_cap},
            {"holdout_count", holdout_count},
            {"exception_cap", exception_cap},
            {"gold_gap_slack", gold_gap_slack},
            {"refine_gold", refine_gold},
            {"adversarial_attempts", adversarial_attempts},
            {"shaping_steps", shaping_steps},
            {"holdout_attempts", holdout_attempts}};
  for (int k = 0; k < kNumObservedPreds; ++k) {
    j["density"].push_back({densities.rho[k].lo, densities.rho[k].hi});
    j["unknown"].push_back(unknown_rates.rate[k]);
  }
  return hex(sha256(j.dump())).substr(0, 16);
}

Hypothesis InstanceRecord::gold_hypothesis() const { return parse_hypothesis(gold, theory_spec().scope); }

int InstanceRecord::gold_total() const {
  int t = 0;
  for (int c : gold_cost) t += c;
  return t;
}

std::string instance_id(Regime scenario, TheoryId theory, int index) {
  std::string s = regime_name(scenario);
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", index);
  return "ABD_" + s + "_" + builtin_theory(theory).internal_id + "_" + buf;
}

namespace {

int exception_limit(const GenParams& p, int n) {
  return static_cast<int>(std::floor(p.exception_cap * n + 1e-9));
}

// Penalty for the per-world filters; 0 iff all pass.
double filter_penalty(const GenParams& p, const WorldCheck& c, int n) {
  double pen = 4.0 * c.violations;
  pen += std::max(0, 1 - c.opt);
  pen += 2.0 * std::max(0, c.opt - exception_limit(p, n));
  if (c.gold_cost) pen += std::max(0, *c.gold_cost - c.opt - p.gold_gap_slack);
  return pen;
}

// Count-preserving local move: swap a true and a false atom of one
// predicate, or (with unknowns in play) move one mask position.
void perturb(LatentWorld& lw, bool masks, Rng& rng) {
  auto swap_in = [&](std::vector<std::uint8_t>& v) {
    std::vector<int> on, off;
    for (int k = 0; k < static_cast<int>(v.size()); ++k) (v[k] ? on : off).push_back(k);
    if (on.empty() || off.empty()) return false;
    const int a = on[rng.index(on.size())], b = off[rng.index(off.size())];
    std::swap(v[a], v[b]);
    return true;
  };
  for (int tries = 0; tries < 8; ++tries) {
    if (masks && rng.uniform_int(0, 3) == 0) {
      const int s = rng.coin() ? static_cast<int>(Pred::R) : static_cast<int>(Pred::S);
      if (swap_in(lw.masked[s])) return;
    } else {
      const int s = static_cast<int>(rng.uniform_int(0, kNumObservedPreds - 1));
      if (swap_in(lw.value[s])) return;
    }
  }
}

// Samples a world of size n and hill-climbs it (sideways moves allowed)
// towards score 0. Returns the world on success.
template <class Score>
std::optional<World> shape_world(const GenParams& p, int n, Rng& rng, Score&& score) {
  LatentWorld lw = sample_latent(n, p.densities, p.unknown_rates, rng);
  World w = lw.to_world();
  double pen = score(w);
  const bool masks = p.scenario != Regime::Full;
  for (int step = 0; step < p.shaping_steps && pen > 0; ++step) {
    LatentWorld cand = lw;
    perturb(cand, masks, rng);
    World cw = cand.to_world();
    const double cp = score(cw);
    if (cp <= pen) {
      lw = std::move(cand);
      w = std::move(cw);
      pen = cp;
    }
  }
  if (pen > 0) return std::nullopt;
  return w;
}

struct CompetitorState {
  Competitor c;
  bool valid_all = true;
  int total = 0;
};

std::optional<int> competitor_cost(const GenParams& p, const World& w, const Hypothesis& h) {
  const WorldResult r = evaluate_world(p.scenario, builtin_theory(p.theory), w, h);
  return r.cost;
}

bool is_survivor(const CompetitorState& s, int gold_total, int margin) {
  return s.valid_all && s.total < gold_total + margin;
}

int count_survivors(const std::vector<CompetitorState>& st, int gold_total, int margin) {
  int k = 0;
  for (const auto& s : st) k += is_survivor(s, gold_total, margin);
  return k;
}

struct Outcomes {
  std::vector<std::optional<int>> cost;  // per competitor; nullopt = invalid or already out
};

// Survivors after hypothetically adding a world with the given outcomes.
int survivors_after(const std::vector<CompetitorState>& st, const Outcomes& o, int gold_total,
                    int margin) {
  int k = 0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (!st[i].valid_all || !o.cost[i]) continue;
    if (st[i].total + *o.cost[i] < gold_total + margin) ++k;
  }
  return k;
}

Outcomes evaluate_competitors(const GenParams& p, const World& w,
                              const std::vector<CompetitorState>& st) {
  Outcomes o;
  o.cost.resize(st.size());
  for (std::size_t i = 0; i < st.size(); ++i)
    if (st[i].valid_all) o.cost[i] = competitor_cost(p, w, st[i].c.hypothesis);
  return o;
}

void apply(std::vector<CompetitorState>& st, const Outcomes& o) {
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (!st[i].valid_all) continue;
    if (!o.cost[i]) st[i].valid_all = false;
    else st[i].total += *o.cost[i];
  }
}

std::vector<Hypothesis> cheaters(const TheorySpec& th) {
  std::vector<Hypothesis> v = tier1_shortcuts(th);
  for (Hypothesis& h : tier2_shortcuts(th)) v.push_back(std::move(h));
  return v;
}

// Best total cost among cheaters valid on every world, if any.
std::optional<int> best_cheater(const GenParams& p, const std::vector<World>& worlds) {
  const TheorySpec& th = builtin_theory(p.theory);
  std::optional<int> best;
  for (const Hypothesis& h : cheaters(th)) {
    int total = 0;
    bool ok = true;
    for (const World& w : worlds) {
      const auto c = competitor_cost(p, w, h);
      if (!c) {
        ok = false;
        break;
      }
      total += *c;
    }
    if (ok && (!best || total < *best)) best = total;
  }
  return best;
}

json world_log(const char* kind, int attempts, const std::vector<CompetitorState>& before,
               const std::vector<CompetitorState>& after, int gold_before, int gold_after, int margin) {
  json elim = json::array();
  for (std::size_t i = 0; i < before.size(); ++i)
    if (is_survivor(before[i], gold_before, margin) && !is_survivor(after[i], gold_after, margin))
      elim.push_back(before[i].c.hypothesis.text());
  return {{"kind", kind}, {"attempts", attempts}, {"eliminated", elim}};
}

int draw_n(const GenParams& p, Rng& rng) {
  return static_cast<int>(rng.uniform_int(p.n_range.lo, p.n_range.hi));
}

}  // namespace

WorldCheck check_world(const GenParams& p, const World& w, const Hypothesis& gold) {
  const TheorySpec& th = builtin_theory(p.theory);
  WorldCheck c;
  c.violations = violation_count(p.scenario, th, w, gold);
  c.gold_valid = c.violations == 0;
  c.opt = opt_cost(p.scenario, th, w);
  if (c.gold_valid) c.gold_cost = evaluate_world(p.scenario, th, w, gold).cost;
  if (!c.gold_valid) c.failed = "gold-validity";
  else if (c.opt < 1) c.failed = "optcost-floor";
  else if (c.opt > exception_limit(p, w.domain_size())) c.failed = "exception-cap";
  else if (*c.gold_cost > c.opt + p.gold_gap_slack) c.failed = "gold-gap";
  c.passes = c.failed.empty();
  return c;
}

InstanceRecord generate_instance(const GenParams& params, const std::string& template_id,
                                 std::uint64_t instance_seed, json* log) {
  params.validate();
  const TheorySpec& th = builtin_theory(params.theory);
  Rng rng(instance_seed);
  json lg = {{"seed", instance_seed}, {"template", template_id}};

  // Gold rule.
  std::optional<Hypothesis> gold;
  for (int k = 0; k < 40 && !gold; ++k) {
    auto h = instantiate_template(template_id, th, rng);
    if (!h) throw GenerationError("template", template_id + " does not fit " + th.short_id);
    const int ast = formula_metrics(h->formula()).ast_size;
    if (ast < 5 || ast > 30) continue;
    if (gold_compatible(*h, th)) gold = std::move(h);
  }
  if (!gold) throw GenerationError("template", "no compatible instantiation of " + template_id);
  lg["gold"] = gold->text();

  std::vector<CompetitorState> st;
  for (Competitor& c : build_competitor_pool(th, *gold, rng, params.pool_cap)) st.push_back({c});
  for (const auto& s : st) lg["pool"].push_back({s.c.hypothesis.text(), tier_name(s.c.tier)});

  const bool shared_n = params.scenario == Regime::Skeptical;
  const int fixed_n = draw_n(params, rng);
  auto next_n = [&] { return shared_n ? fixed_n : draw_n(params, rng); };

  std::vector<World> worlds;
  std::vector<WorldCheck> checks;
  int gold_total = 0;
  auto accept_world = [&](World w, WorldCheck c, const Outcomes& o, const char* kind, int attempts) {
    const auto before = st;
    const int gb = gold_total;
    apply(st, o);
    gold_total += *c.gold_cost;
    lg["worlds"].push_back(world_log(kind, attempts, before, st, gb, gold_total, params.margin));
    worlds.push_back(std::move(w));
    checks.push_back(std::move(c));
  };
  auto filter_score = [&](const World& w) {
    return filter_penalty(params, check_world(params, w, *gold), w.domain_size());
  };

  // Initial world: filters only.
  {
    int attempts = 0;
    std::optional<World> w;
    while (!w && attempts < params.adversarial_attempts) {
      ++attempts;
      w = shape_world(params, next_n(), rng, filter_score);
    }
    if (!w) throw GenerationError("initial-world", "no world passes the per-world filters");
    WorldCheck c = check_world(params, *w, *gold);
    const Outcomes o = evaluate_competitors(params, *w, st);
    accept_world(std::move(*w), std::move(c), o, "initial", attempts);
  }

  // Competitor elimination.
  while (count_survivors(st, gold_total, params.margin) > 0) {
    if (static_cast<int>(worlds.size()) >= params.world_budget)
      throw GenerationError("world-budget", std::to_string(count_survivors(st, gold_total, params.margin)) +
                                                " competitors survive at the world budget");
    const int surv = count_survivors(st, gold_total, params.margin);
    std::optional<World> found;
    int attempts = 0;
    while (!found && attempts < params.adversarial_attempts) {
      ++attempts;
      found = shape_world(params, next_n(), rng, [&](const World& w) {
        const WorldCheck c = check_world(params, w, *gold);
        const double fp = filter_penalty(params, c, w.domain_size());
        if (fp > 0) return 10.0 * fp + 2.0;
        const Outcomes o = evaluate_competitors(params, w, st);
        const int after = survivors_after(st, o, gold_total + *c.gold_cost, params.margin);
        if (after < surv) return 0.0;
        // Closest survivor to elimination by cost.
        int best = 1 << 20;
        for (std::size_t i = 0; i < st.size(); ++i) {
          if (!st[i].valid_all || !o.cost[i]) continue;
          const int d = gold_total + *c.gold_cost + params.margin - (st[i].total + *o.cost[i]);
          if (d > 0) best = std::min(best, d);
        }
        return 1.0 + double(after - surv + 1) * 0.25 + best / (best + 1.0) * 0.2;
      });
    }
    if (!found)
      throw GenerationError("adversarial", "no candidate world removes a surviving competitor");
    WorldCheck c = check_world(params, *found, *gold);
    const Outcomes o = evaluate_competitors(params, *found, st);
    accept_world(std::move(*found), std::move(c), o, "adversarial", attempts);
  }

  // Padding up to the minimum world count, never reviving a competitor.
  while (static_cast<int>(worlds.size()) < params.min_worlds) {
    std::optional<World> found;
    std::optional<WorldCheck> fc;
    std::optional<Outcomes> fo;
    int attempts = 0;
    while (!found && attempts < params.adversarial_attempts) {
      ++attempts;
      auto w = shape_world(params, next_n(), rng, filter_score);
      if (!w) continue;
      WorldCheck c = check_world(params, *w, *gold);
      Outcomes o = evaluate_competitors(params, *w, st);
      if (survivors_after(st, o, gold_total + *c.gold_cost, params.margin) > 0) continue;
      found = std::move(w);
      fc = std::move(c);
      fo = std::move(o);
    }
    if (!found) throw GenerationError("padding", "no neutral world within the attempt budget");
    accept_world(std::move(*found), std::move(*fc), *fo, "padding", attempts);
  }

  Hypothesis final_gold = *gold;
  if (params.refine_gold) {
    std::vector<Competitor> pool;
    for (const auto& s : st) pool.push_back(s.c);
    final_gold = refine_gold(params, worlds, *gold, pool, rng, &lg);
  }

  InstanceRecord inst;
  inst.scenario = params.scenario;
  inst.theory = params.theory;
  inst.worlds = worlds;
  inst.gold = final_gold.text();
  inst.gold_template = template_id;
  for (const World& w : worlds) {
    const WorldCheck c = check_world(params, w, final_gold);
    if (!c.passes) throw GenerationError(c.failed, "refined gold fails a world filter");
    inst.gold_cost.push_back(*c.gold_cost);
    inst.opt_cost.push_back(c.opt);
    if (params.scenario == Regime::Skeptical)
      inst.opt_cost_uniform.push_back(opt_cost(params.scenario, th, w, OptVariant::Uniform));
  }
  for (const auto& s : st) inst.competitors.push_back({s.c.hypothesis.text(), s.c.tier});

  // Cheater screen.
  const auto cheat = best_cheater(params, worlds);
  if (cheat) {
    inst.cheater_margin = *cheat - inst.gold_total();
    lg["cheater"] = {{"best_cost", *cheat}, {"gold_cost", inst.gold_total()}};
    if (*cheat <= inst.gold_total() - 1)
      throw GenerationError("cheater", "a shortcut formula undercuts the gold cost");
  }
  inst.provenance.instance_seed = instance_seed;
  lg["outcome"] = "accepted";
  if (log) *log = std::move(lg);
  return inst;
}

Hypothesis refine_gold(const GenParams& params, const std::vector<World>& worlds,
                       const Hypothesis& seed_gold, const std::vector<Competitor>& pool, Rng& rng,
                       json* log) {
  const TheorySpec& th = builtin_theory(params.theory);
  std::vector<Hypothesis> cands{seed_gold};
  for (Hypothesis& m : gold_mutants(seed_gold, th, rng, params.refine_candidates / 2))
    cands.push_back(std::move(m));
  const auto ids = usable_templates(th);
  for (int k = 0; static_cast<int>(cands.size()) < params.refine_candidates + 1 && k < 4 * params.refine_candidates; ++k)
    if (auto h = instantiate_template(ids[rng.index(ids.size())], th, rng)) cands.push_back(std::move(*h));

  struct Key {
    int cost;
    int neg_margin;
    int ast;
    auto operator<=>(const Key&) const = default;
  };
  std::optional<Key> best_key;
  std::size_t best = 0;
  const auto cheat = best_cheater(params, worlds);
  for (std::size_t k = 0; k < cands.size(); ++k) {
    const Hypothesis& h = cands[k];
    int total = 0;
    bool ok = true;
    for (const World& w : worlds) {
      const WorldCheck c = check_world(params, w, h);
      if (!c.passes) {
        ok = false;
        break;
      }
      total += *c.gold_cost;
    }
    if (!ok) continue;
    // The pool must stay beaten against the new gold.
    for (const Competitor& c : pool) {
      if (probe_equivalent(c.hypothesis.formula(), h.formula())) continue;
      bool valid = true;
      int ct = 0;
      for (const World& w : worlds) {
        const auto cc = competitor_cost(params, w, c.hypothesis);
        if (!cc) {
          valid = false;
          break;
        }
        ct += *cc;
      }
      if (valid && ct < total + params.margin) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const int margin = cheat ? *cheat - total : 1 << 20;
    if (margin < 0) continue;
    const Key key{total, -margin, formula_metrics(h.formula()).ast_size};
    if (!best_key || key < *best_key) {
      best_key = key;
      best = k;
    }
  }
  if (log) (*log)["refine"] = {{"candidates", cands.size()}, {"chosen", cands[best].text()}};
  return cands[best];
}

void generate_holdouts(InstanceRecord& inst, const GenParams& params, const std::string& dataset_path,
                       std::uint64_t global_seed, json* log) {
  const Hypothesis gold = inst.gold_hypothesis();
  inst.holdouts.clear();
  inst.holdout_gold_cost.clear();
  inst.holdout_opt_cost.clear();
  inst.provenance.holdout_seeds.clear();
  inst.provenance.dataset_path = dataset_path;

  int nlo = 1 << 20, nhi = 0, clo = 1 << 20, chi = -1, glo = 1 << 20, ghi = -1 << 20;
  for (std::size_t k = 0; k < inst.worlds.size(); ++k) {
    nlo = std::min(nlo, inst.worlds[k].domain_size());
    nhi = std::max(nhi, inst.worlds[k].domain_size());
    clo = std::min(clo, inst.gold_cost[k]);
    chi = std::max(chi, inst.gold_cost[k]);
    const int gap = inst.gold_cost[k] - inst.opt_cost[k];
    glo = std::min(glo, gap);
    ghi = std::max(ghi, gap);
  }
  GenParams hp = params;
  hp.n_range = {nlo, nhi};

  json hl = json::array();
  for (int idx = 0; idx < params.holdout_count; ++idx) {
    const std::uint32_t seed = holdout_seed(dataset_path, inst.id, idx, global_seed);
    inst.provenance.holdout_seeds.push_back(seed);
    Rng rng(seed);
    std::optional<World> found;
    std::optional<WorldCheck> fc;
    int attempts = 0;
    while (!found && attempts < params.holdout_attempts) {
      ++attempts;
      auto w = shape_world(hp, draw_n(hp, rng), rng, [&](const World& cw) {
        const WorldCheck c = check_world(hp, cw, gold);
        double pen = filter_penalty(hp, c, cw.domain_size());
        if (c.gold_cost) {
          const int cost = *c.gold_cost, gap = cost - c.opt;
          pen += std::max(0, clo - cost) + std::max(0, cost - chi);
          pen += std::max(0, glo - gap) + std::max(0, gap - ghi);
        }
        return pen;
      });
      if (!w) continue;
      const bool dup =
          std::any_of(inst.worlds.begin(), inst.worlds.end(), [&](const World& t) { return worlds_equivalent(t, *w); }) ||
          std::any_of(inst.holdouts.begin(), inst.holdouts.end(), [&](const World& t) { return worlds_equivalent(t, *w); });
      if (dup) continue;
      fc = check_world(hp, *w, gold);
      found = std::move(w);
    }
    hl.push_back({{"idx", idx}, {"seed", seed}, {"attempts", attempts}, {"accepted", found.has_value()}});
    if (!found) {
      inst.holdouts.clear();
      inst.holdout_gold_cost.clear();
      inst.holdout_opt_cost.clear();
      inst.holdout_available = false;
      if (log) (*log)["holdouts"] = hl;
      return;
    }
    inst.holdout_gold_cost.push_back(*fc->gold_cost);
    inst.holdout_opt_cost.push_back(fc->opt);
    inst.holdouts.push_back(std::move(*found));
  }
  inst.holdout_available = params.holdout_count > 0;
  if (log) (*log)["holdouts"] = hl;
}

std::vector<std::string> audit_instance(const InstanceRecord& inst, const GenParams& params) {
  std::vector<std::string> v;
  auto fail = [&](const std::string& s) { v.push_back(inst.id + ": " + s); };
  const TheorySpec& th = builtin_theory(inst.theory);
  if (inst.scenario != params.scenario || inst.theory != params.theory) fail("parameter mismatch");
  if (!th.supports(inst.scenario)) fail("theory not used in this scenario");
  std::optional<Hypothesis> gold;
  try {
    gold = inst.gold_hypothesis();
  } catch (const std::exception& e) {
    fail(std::string("gold does not validate: ") + e.what());
    return v;
  }
  const int ast = formula_metrics(gold->formula()).ast_size;
  if (ast < 5 || ast > 30) fail("gold AST size outside [5, 30]");
  if (inst.worlds.empty()) fail("no training worlds");
  if (static_cast<int>(inst.worlds.size()) > params.world_budget) fail("more worlds than the budget");
  if (inst.gold_cost.size() != inst.worlds.size() || inst.opt_cost.size() != inst.worlds.size()) {
    fail("cached per-world values do not match the world count");
    return v;
  }
  for (std::size_t k = 0; k < inst.worlds.size(); ++k) {
    const World& w = inst.worlds[k];
    const std::string tag = "world " + std::to_string(k) + ": ";
    if (w.domain_size() < params.n_range.lo || w.domain_size() > params.n_range.hi)
      fail(tag + "domain size outside the scenario range");
    if (inst.scenario == Regime::Skeptical && w.domain_size() != inst.worlds[0].domain_size())
      fail(tag + "skeptical worlds must share one domain size");
    if (inst.scenario == Regime::Full && w.num_unknown() > 0) fail(tag + "unknown atoms in a Full world");
    if (!w.unknown_atoms(Pred::P).empty() || !w.unknown_atoms(Pred::Q).empty())
      fail(tag + "unknown unary atoms");
    const WorldCheck c = check_world(params, w, *gold);
    if (!c.passes) fail(tag + "filter " + c.failed);
    if (c.gold_cost && *c.gold_cost != inst.gold_cost[k]) fail(tag + "cached gold cost is stale");
    if (c.opt != inst.opt_cost[k]) fail(tag + "cached OptCost is stale");
  }
  if (inst.scenario == Regime::Skeptical) {
    if (inst.opt_cost_uniform.size() != inst.worlds.size()) fail("missing uniform OptCost cache");
    else
      for (std::size_t k = 0; k < inst.worlds.size(); ++k)
        if (opt_cost(inst.scenario, th, inst.worlds[k], OptVariant::Uniform) != inst.opt_cost_uniform[k])
          fail("world " + std::to_string(k) + ": cached uniform OptCost is stale");
  }
  // Competitors.
  if (static_cast<int>(inst.competitors.size()) > params.pool_cap) fail("competitor pool above cap");
  const int gold_total = inst.gold_total();
  for (const CompetitorRecord& cr : inst.competitors) {
    std::optional<Hypothesis> h;
    try {
      h = parse_hypothesis(cr.formula, th.scope);
    } catch (const std::exception& e) {
      fail("competitor " + cr.formula + " out of scope: " + e.what());
      continue;
    }
    bool valid = true;
    int total = 0;
    for (const World& w : inst.worlds) {
      const auto c = competitor_cost(params, w, *h);
      if (!c) {
        valid = false;
        break;
      }
      total += *c;
    }
    if (valid && total < gold_total + params.margin) fail("competitor " + cr.formula + " survives");
  }
  const auto cheat = best_cheater(params, inst.worlds);
  if (cheat && *cheat - gold_total < 0) fail("cheater margin below 0");
  if (cheat != (inst.cheater_margin ? std::optional<int>(*inst.cheater_margin + gold_total) : std::nullopt))
    fail("cached cheater margin is stale");
  // Holdouts.
  if (inst.holdout_available != !inst.holdouts.empty()) fail("holdout availability flag inconsistent");
  if (inst.holdout_gold_cost.size() != inst.holdouts.size() || inst.holdout_opt_cost.size() != inst.holdouts.size()) {
    fail("cached holdout values do not match the holdout count");
    return v;
  }
  int clo = 1 << 20, chi = -1, glo = 1 << 20, ghi = -1 << 20, nlo = 1 << 20, nhi = 0;
  for (std::size_t k = 0; k < inst.worlds.size(); ++k) {
    clo = std::min(clo, inst.gold_cost[k]);
    chi = std::max(chi, inst.gold_cost[k]);
    glo = std::min(glo, inst.gold_cost[k] - inst.opt_cost[k]);
    ghi = std::max(ghi, inst.gold_cost[k] - inst.opt_cost[k]);
    nlo = std::min(nlo, inst.worlds[k].domain_size());
    nhi = std::max(nhi, inst.worlds[k].domain_size());
  }
  for (std::size_t k = 0; k < inst.holdouts.size(); ++k) {
    const World& w = inst.holdouts[k];
    const std::string tag = "holdout " + std::to_string(k) + ": ";
    if (w.domain_size() < nlo || w.domain_size() > nhi) fail(tag + "domain size outside the training range");
    const WorldCheck c = check_world(params, w, *gold);
    if (!c.passes) {
      fail(tag + "filter " + c.failed);
      continue;
    }
    if (*c.gold_cost != inst.holdout_gold_cost[k] || c.opt != inst.holdout_opt_cost[k])
      fail(tag + "cached values are stale");
    const int gap = *c.gold_cost - c.opt;
    if (*c.gold_cost < clo || *c.gold_cost > chi || gap < glo || gap > ghi)
      fail(tag + "gold cost or gap outside the training range");
    for (const World& t : inst.worlds)
      if (worlds_equivalent(t, w)) fail(tag + "equivalent to a training world");
    for (std::size_t j = 0; j < k; ++j)
      if (worlds_equivalent(inst.holdouts[j], w)) fail(tag + "duplicate holdout");
  }
  return v;
}

GenParams params_for(const BatchParams& b, TheoryId theory) {
  GenParams p = GenParams::defaults(b.scenario, theory);
  p.global_seed = b.global_seed;
  if (b.world_budget) p.world_budget = *b.world_budget;
  if (b.margin) p.margin = *b.margin;
  if (b.holdouts) p.holdout_count = *b.holdouts;
  if (b.min_worlds) p.min_worlds = *b.min_worlds;
  p.min_worlds = std::min(p.min_worlds, p.world_budget);
  p.refine_gold = b.refine_gold;
  return p;
}

BatchResult generate_batch(const BatchParams& b) {
  if (b.theories.empty()) throw GenerationError("params", "no theories selected");
  if (b.count < 0) throw GenerationError("params", "negative count");
  const int T = static_cast<int>(b.theories.size());

  // Per-theory template order, fixed by the global seed.
  std::vector<std::vector<std::string>> order(T);
  for (int t = 0; t < T; ++t) {
    order[t] = usable_templates(builtin_theory(b.theories[t]));
    Rng rng(derive_seed(b.global_seed, {0x7e3b1a7eULL, static_cast<std::uint64_t>(b.theories[t])}));
    for (std::size_t i = order[t].size(); i > 1; --i) std::swap(order[t][i - 1], order[t][rng.index(i)]);
  }

  BatchResult out;
  out.instances.resize(b.count);
  out.logs.resize(b.count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= b.count) return;
      try {
        const int t = i % T;
        const TheoryId tid = b.theories[t];
        const GenParams p = params_for(b, tid);
        const auto& ord = order[t];
        json attempts = json::array();
        bool done = false;
        for (int a = 0; a < b.max_attempts && !done; ++a) {
          const std::string& tmpl = ord[(i / T + a / b.attempts_per_template) % ord.size()];
          const std::uint64_t seed = derive_seed(
              b.global_seed, {static_cast<std::uint64_t>(b.scenario), static_cast<std::uint64_t>(tid),
                              static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(a)});
          json lg;
          try {
            InstanceRecord inst = generate_instance(p, tmpl, seed, &lg);
            inst.id = instance_id(b.scenario, tid, i);
            inst.provenance.global_seed = b.global_seed;
            inst.provenance.index = i;
            inst.provenance.attempt = a;
            if (p.holdout_count > 0) generate_holdouts(inst, p, b.dataset_path, b.global_seed, &lg);
            else inst.provenance.dataset_path = b.dataset_path;
            out.instances[i] = std::move(inst);
            done = true;
          } catch (const GenerationError& e) {
            lg["outcome"] = "rejected";
            lg["filter"] = e.filter();
            lg["detail"] = e.what();
          }
          attempts.push_back(std::move(lg));
        }
        if (!done)
          throw GenerationError("attempts", "instance " + std::to_string(i) + " not generated within " +
                                                std::to_string(b.max_attempts) + " attempts");
        out.logs[i] = {{"instance_id", out.instances[i].id}, {"attempts", std::move(attempts)}};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(b.count);
        return;
      }
    }
  };

  const int threads = std::max(1, std::min(b.threads, b.count));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace abd
